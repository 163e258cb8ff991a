import tempfile
import unittest
from pathlib import Path

from config.lexicon import DEONTIC_TRIGGERS
from core.errors import ConfigError, InputError
from core.policy import (DeonticRule, DeonticType, TriggerLexicon, export_rules, extract_rules, load_lexicon,
                         load_rules, rule_counts, split_sentences)

POLICY_SENTENCES = [
    ("The farmer can provide data to land owners, potato processors, the government, "
     "paying authorities, etc.", 'can', DeonticType.PERMISSION),
    ("Parties may not use, process, or share data without the consent of the data originator.",
     'may not', DeonticType.PROHIBITION),
    ("Contracts must not be amended without the prior consent of the data originator.",
     'must not', DeonticType.PROHIBITION),
    ("Data cannot be owned in the same way as physical assets.", 'cannot', DeonticType.PROHIBITION),
    ("The datasets should only be kept for as long as is strictly necessary.", 'should',
     DeonticType.OBLIGATION),
    ("The rights regarding farm data are granted to the farmer and may be used extensively by them.",
     'may', DeonticType.PERMISSION),
]


class TestExtractRules(unittest.TestCase):
    def test_policy_sentences(self):
        for sentence, trigger, deontic_type in POLICY_SENTENCES:
            rules = extract_rules(sentence)
            self.assertEqual([r.trigger for r in rules], [trigger], sentence)
            self.assertEqual(rules[0].deontic_type, deontic_type)
            self.assertEqual(rules[0].source, 'document#1')

    def test_no_modal_no_rule(self):
        self.assertEqual(extract_rules("The farm grows potatoes near the river."), [])

    def test_longest_match_wins(self):
        rules = extract_rules("The lessee shall not sublet the field.")
        self.assertEqual(len(rules), 1)
        self.assertEqual(rules[0].trigger, 'shall not')
        self.assertEqual(rules[0].deontic_type, DeonticType.PROHIBITION)

    def test_every_trigger_found_once(self):
        lexicon = TriggerLexicon.default()
        for type_name, phrases in DEONTIC_TRIGGERS.items():
            for phrase in phrases:
                rules = extract_rules("Data " + phrase + " be shared.", lexicon)
                self.assertEqual(len(rules), 1, phrase)
                self.assertEqual(rules[0].trigger, phrase)
                self.assertEqual(rules[0].deontic_type.value, type_name)
                self.assertEqual(rules[0].start_index, 5)

    def test_offsets_point_at_trigger(self):
        text = "You MAY share it; you Must keep records. Nobody Shall Not sell it!"
        rules = extract_rules(text)
        self.assertEqual(len(rules), 3)
        for rule in rules:
            span = rule.sentence[rule.start_index:rule.start_index + len(rule.trigger)]
            self.assertEqual(span.lower(), rule.trigger)
        self.assertEqual([r.source for r in rules], ['document#1', 'document#2', 'document#3'])

    def test_wrapped_trigger_stays_prohibition(self):
        rules = extract_rules("Parties may\nnot use or share data without the consent of the data originator.")
        self.assertEqual([(r.trigger, r.deontic_type) for r in rules], [('may not', DeonticType.PROHIBITION)])
        self.assertEqual(rules[0].start_index, 8)

    def test_double_spaced_trigger(self):
        rules = extract_rules("Contracts must  not be amended.")
        self.assertEqual([(r.trigger, r.deontic_type) for r in rules], [('must not', DeonticType.PROHIBITION)])
        self.assertTrue(rules[0].sentence[rules[0].start_index:].startswith('must  not'))

    def test_wrapped_rule_survives_roundtrip(self):
        rules = extract_rules("The lessee shall\t\nnot sublet the field.")
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'rules.jsonl'
            export_rules(rules, path)
            self.assertEqual(load_rules(path), rules)

    def test_rule_offset_must_point_at_trigger(self):
        with self.assertRaises(InputError):
            DeonticRule(
                sentence="Data may be shared.", trigger='may', start_index=0,
                deontic_type=DeonticType.PERMISSION, source='document#1')

    def test_no_match_inside_words(self):
        self.assertEqual(extract_rules("The canal mayor willingly agreed."), [])

    def test_several_mentions_in_one_sentence(self):
        rules = extract_rules("The farmer may sell and must report the sale.")
        self.assertEqual([r.trigger for r in rules], ['may', 'must'])

    def test_rule_counts(self):
        rules = extract_rules(" ".join(s for s, _, _ in POLICY_SENTENCES))
        counts = rule_counts(rules)
        self.assertEqual(counts, {'Permission': 2, 'Prohibition': 3, 'Obligation': 1, 'Entitlement': 0})


class TestSplitSentences(unittest.TestCase):
    def test_two_sentences(self):
        sentences = split_sentences("A shall B. C may D.")
        self.assertEqual([s.text for s in sentences], ["A shall B.", "C may D."])
        self.assertEqual(sentences[1].start, 11)

    def test_empty_text(self):
        self.assertEqual(split_sentences(""), [])

    def test_abbreviation_is_over_split(self):
        sentences = split_sentences("Use a tag, e.g. example tags.")
        self.assertEqual(len(sentences), 2)

    def test_offsets_into_original(self):
        text = "  First one;   second one!"
        for sentence in split_sentences(text):
            self.assertEqual(text[sentence.start:sentence.start + len(sentence.text)], sentence.text)


class TestLexicon(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text):
        path = self.dir / 'lexicon.txt'
        path.write_text(text, encoding='utf-8')
        return path

    def test_default(self):
        lexicon = load_lexicon()
        self.assertIn('must not', lexicon.triggers[DeonticType.PROHIBITION])
        self.assertEqual(lexicon.triggers[DeonticType.ENTITLEMENT], [])

    def test_extend_with_entitlement(self):
        lexicon = load_lexicon(self.write("[Entitlement]\nis entitled to\n"))
        self.assertEqual(lexicon.type_of('is entitled to'), DeonticType.ENTITLEMENT)
        self.assertIn('may', lexicon)
        rules = extract_rules("The farmer is entitled to a copy of the data.", lexicon)
        self.assertEqual(rules[0].deontic_type, DeonticType.ENTITLEMENT)

    def test_duplicate_phrase_named(self):
        with self.assertRaises(ConfigError) as ctx:
            load_lexicon(self.write("[Obligation]\nmay\n"))
        self.assertIn("'may'", str(ctx.exception))

    def test_replace_mode(self):
        lexicon = load_lexicon(self.write("mode = replace\n[Permission]\nmay\n"))
        self.assertEqual(list(lexicon.phrase_types), ['may'])
        self.assertNotIn('must', lexicon)

    def test_unknown_section(self):
        with self.assertRaises(ConfigError) as ctx:
            load_lexicon(self.write("[Suggestion]\nmight\n"))
        self.assertEqual(ctx.exception.line, 2)


class TestRuleFile(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.rules = extract_rules(" ".join(s for s, _, _ in POLICY_SENTENCES[:3]), document='code')

    def tearDown(self):
        self.tmp.cleanup()

    def test_export_then_load(self):
        path = self.dir / 'rules.jsonl'
        export_rules(self.rules, path, header='# policyvault 0.1.0 seed=0 config=abc')
        self.assertEqual(len(self.rules), 3)
        self.assertEqual(load_rules(path), self.rules)

    def test_empty_rule_list(self):
        path = self.dir / 'empty.jsonl'
        export_rules([], path)
        self.assertEqual(load_rules(path), [])

    def test_second_export_is_byte_identical(self):
        first, second = self.dir / 'first.jsonl', self.dir / 'second.jsonl'
        export_rules(self.rules, first)
        export_rules(load_rules(first), second)
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_unwritable_path(self):
        blocker = self.dir / 'blocker'
        blocker.write_text('not a directory', encoding='utf-8')
        with self.assertRaises(InputError):
            export_rules(self.rules, blocker / 'rules.jsonl')

    def test_bad_record_cites_line(self):
        path = self.dir / 'broken.jsonl'
        path.write_text('# header\n{"sentence": "x"}\n', encoding='utf-8')
        with self.assertRaises(InputError) as ctx:
            load_rules(path)
        self.assertEqual(ctx.exception.line, 2)


if __name__ == "__main__":
    unittest.main()
