# core/policy.py

import json
import logging
import re
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional

from config import lexicon as lexicon_config
from core.errors import ConfigError, InputError
from utils.helpers import read_sections, split_assignment, strip_header_lines

logger = logging.getLogger(__name__)

SENTENCE_END = re.compile(r'[.!?;](?=\s|$)')
WHITESPACE = re.compile(r'\s+')


class DeonticType(str, Enum):
    PERMISSION = 'Permission'
    PROHIBITION = 'Prohibition'
    OBLIGATION = 'Obligation'
    ENTITLEMENT = 'Entitlement'

    @classmethod
    def parse(cls, token: str) -> 'DeonticType':
        """Accept the type name in any case, singular or plural."""
        cleaned = token.strip().lower()
        for member in cls:
            if cleaned in (member.value.lower(), member.value.lower() + 's'):
                return member
        raise ValueError(f"unknown deontic type '{token}'")


class Sentence(NamedTuple):
    text: str
    start: int      # character offset into the source document
    ordinal: int    # 1-based position in the document


@dataclass(frozen=True)
class DeonticRule:
    sentence: str
    trigger: str
    start_index: int
    deontic_type: DeonticType
    source: str

    def __post_init__(self):
        if not phrase_pattern(self.trigger).match(self.sentence, self.start_index):
            raise InputError(
                f"trigger '{self.trigger}' not found at offset {self.start_index} of its sentence"
            )

    def to_record(self) -> Dict:
        record = asdict(self)
        record['deontic_type'] = self.deontic_type.value
        return record

    @classmethod
    def from_record(cls, record: Dict) -> 'DeonticRule':
        return cls(
            sentence=str(record['sentence']),
            trigger=str(record['trigger']),
            start_index=int(record['start_index']),
            deontic_type=DeonticType.parse(record['deontic_type']),
            source=str(record['source']),
        )


def _normalize_phrase(phrase: str) -> str:
    return WHITESPACE.sub(' ', phrase.strip().lower())


def _phrase_source(phrase: str) -> str:
    # Tokens may be separated by any run of whitespace, line breaks included
    return r'\s+'.join(re.escape(token) for token in phrase.split())


def phrase_pattern(phrase: str) -> re.Pattern:
    return re.compile(r'(?<!\w)' + _phrase_source(phrase) + r'(?!\w)', re.IGNORECASE)


class TriggerLexicon:
    """Deontic type -> trigger phrases, with a compiled longest-first matcher."""

    def __init__(self, triggers: Dict[DeonticType, Iterable[str]]):
        self.triggers: Dict[DeonticType, List[str]] = {t: [] for t in DeonticType}
        self.phrase_types: Dict[str, DeonticType] = {}

        for deontic_type, phrases in triggers.items():
            deontic_type = DeonticType(deontic_type)
            for phrase in phrases:
                phrase = _normalize_phrase(phrase)
                if not phrase:
                    continue
                owner = self.phrase_types.get(phrase)
                if owner is not None and owner != deontic_type:
                    raise ConfigError(
                        f"trigger '{phrase}' listed under both {owner.value} and {deontic_type.value}"
                    )
                if owner is None:
                    self.phrase_types[phrase] = deontic_type
                    self.triggers[deontic_type].append(phrase)

        self._pattern = self._compile()

    def _compile(self) -> Optional[re.Pattern]:
        if not self.phrase_types:
            return None
        # Longest phrases first so "shall not" wins over "shall" at the same offset
        ordered = sorted(self.phrase_types, key=lambda p: (-len(p), p))
        alternation = '|'.join(_phrase_source(p) for p in ordered)
        return re.compile(r'(?<!\w)(?:' + alternation + r')(?!\w)', re.IGNORECASE)

    def type_of(self, phrase: str) -> DeonticType:
        return self.phrase_types[_normalize_phrase(phrase)]

    def __contains__(self, phrase: str) -> bool:
        return _normalize_phrase(phrase) in self.phrase_types

    def merged(self, extra: Dict[DeonticType, Iterable[str]]) -> 'TriggerLexicon':
        combined = {t: list(p) for t, p in self.triggers.items()}
        for deontic_type, phrases in extra.items():
            combined.setdefault(DeonticType(deontic_type), []).extend(phrases)
        return TriggerLexicon(combined)

    def find(self, text: str):
        """Yield (offset, canonical phrase) for each non-overlapping trigger."""
        if self._pattern is None:
            return
        for match in self._pattern.finditer(text):
            yield match.start(), _normalize_phrase(match.group(0))

    @classmethod
    def default(cls) -> 'TriggerLexicon':
        return cls({DeonticType(t): p for t, p in lexicon_config.DEONTIC_TRIGGERS.items()})


def load_lexicon(path=None, replace: bool = False) -> TriggerLexicon:
    """Build the trigger lexicon.

    Without a path the built-in modal-verb table is returned. A file has
    sections headed by a deontic type name and one phrase per line; it
    extends the built-in table unless replace is set or the file opens
    with a 'mode = replace' line.
    """
    default = TriggerLexicon.default()
    if path is None:
        return default

    extra: Dict[DeonticType, List[str]] = {}
    for section, line_no, line in read_sections(path):
        if section is None:
            name, value = split_assignment(line, path=str(path), line_no=line_no)
            if name.lower() != 'mode' or value.lower() not in ('replace', 'extend'):
                raise ConfigError("only 'mode = replace|extend' may precede the first section",
                                  path=str(path), line=line_no)
            replace = replace or value.lower() == 'replace'
            continue
        try:
            deontic_type = DeonticType.parse(section)
        except ValueError as e:
            raise ConfigError(str(e), path=str(path), line=line_no)
        extra.setdefault(deontic_type, []).append(line)

    try:
        if replace:
            lexicon = TriggerLexicon(extra)
        else:
            lexicon = default.merged(extra)
    except ConfigError as e:
        raise ConfigError(e.reason, path=str(path))

    logger.info(f"Loaded lexicon with {len(lexicon.phrase_types)} triggers from {Path(path).name}")
    return lexicon


def split_sentences(text: str) -> List[Sentence]:
    """Split at '.', '!', '?' or ';' followed by whitespace or end of text.

    Abbreviations such as "e.g." are over-split; offsets always point into
    the original text.
    """
    sentences = []
    start = 0
    boundaries = [m.end() for m in SENTENCE_END.finditer(text)]
    if not boundaries or boundaries[-1] < len(text):
        boundaries.append(len(text))

    for end in boundaries:
        segment = text[start:end]
        stripped = segment.strip()
        if stripped and any(ch.isalnum() for ch in stripped):
            offset = start + (len(segment) - len(segment.lstrip()))
            sentences.append(Sentence(stripped, offset, len(sentences) + 1))
        start = end
    return sentences


def extract_rules(text: str, lexicon: Optional[TriggerLexicon] = None,
                  document: str = 'document') -> List[DeonticRule]:
    """Emit one DeonticRule per trigger mention in each sentence.

    Matching is case-insensitive, token-boundary aware and longest-first,
    so "may not" is a prohibition and never also a permission.
    """
    lexicon = lexicon or TriggerLexicon.default()
    rules = []
    for sentence in split_sentences(text):
        for offset, phrase in lexicon.find(sentence.text):
            rules.append(DeonticRule(
                sentence=sentence.text,
                trigger=phrase,
                start_index=offset,
                deontic_type=lexicon.type_of(phrase),
                source=f"{document}#{sentence.ordinal}",
            ))
    logger.info(f"Extracted {len(rules)} rules from {document}")
    return rules


def rule_counts(rules: Iterable[DeonticRule]) -> Dict[str, int]:
    """Number of rules per deontic type, every type present."""
    counts = {t.value: 0 for t in DeonticType}
    for rule in rules:
        counts[rule.deontic_type.value] += 1
    return counts


def export_rules(rules: Iterable[DeonticRule], path, header: Optional[str] = None) -> None:
    """Write rules as JSON Lines with sorted keys (canonical form)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8', newline='\n') as fh:
            if header:
                fh.write(header.rstrip('\n') + '\n')
            for rule in rules:
                fh.write(json.dumps(rule.to_record(), sort_keys=True, ensure_ascii=False) + '\n')
    except OSError as e:
        raise InputError(f"cannot write rule file: {e.strerror}", path=str(path))


def load_rules(path) -> List[DeonticRule]:
    path = Path(path)
    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except OSError as e:
        raise InputError(f"cannot read rule file: {e.strerror}", path=str(path))

    offset = len(lines) - len(list(strip_header_lines(lines)))
    rules = []
    for line_no, line in enumerate(lines[offset:], start=offset + 1):
        if not line.strip():
            continue
        try:
            rules.append(DeonticRule.from_record(json.loads(line)))
        except (ValueError, KeyError, TypeError) as e:
            raise InputError(f"invalid rule record: {e}", path=str(path), line=line_no)
    return rules
