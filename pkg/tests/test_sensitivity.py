import tempfile
import unittest
from pathlib import Path

from core.dataset import CONTINUOUS, DISCRETE, ColumnSpec, Schema
from core.errors import ConfigError, InputError
from core.policy import extract_rules
from core.sensitivity import (DEFAULT, EXPLICIT, TAG_MATCH, SensitivityLevel, SensitivityMap,
                              classify_attributes, load_sensitivity_config, load_sensitivity_map,
                              privacy_bands, save_sensitivity_map, tier_histogram,
                              validate_band_config)

High, Medium, Low = SensitivityLevel.HIGH, SensitivityLevel.MEDIUM, SensitivityLevel.LOW

KEYWORDS = {'PII': ['data'], 'public': ['government'], 'location': ['gps']}

SCHEMA = Schema((
    ColumnSpec('farm_income', CONTINUOUS, frozenset(['PII'])),
    ColumnSpec('region', DISCRETE, frozenset(['public'])),
    ColumnSpec('plot_gps', CONTINUOUS, frozenset(['location'])),
    ColumnSpec('herd_size', CONTINUOUS),
))

RULES = extract_rules(
    "Parties may not use, process, or share data without the consent of the data originator. "
    "The farmer can report totals to the government."
)


class TestClassifyAttributes(unittest.TestCase):
    def setUp(self):
        self.result = classify_attributes(SCHEMA, RULES, KEYWORDS)

    def test_prohibition_makes_high(self):
        self.assertEqual(self.result.level('farm_income'), High)
        self.assertEqual(self.result['farm_income'].provenance.kind, TAG_MATCH)
        self.assertIn('Prohibition', self.result['farm_income'].provenance.detail)

    def test_permission_only_makes_low(self):
        self.assertEqual(self.result.level('region'), Low)

    def test_unmatched_tag_is_medium(self):
        self.assertEqual(self.result.level('plot_gps'), Medium)

    def test_untagged_defaults_high(self):
        self.assertEqual(self.result.level('herd_size'), High)
        self.assertEqual(self.result['herd_size'].provenance.kind, DEFAULT)

    def test_totality(self):
        self.assertEqual(len(self.result), SCHEMA.width)
        self.assertEqual(tier_histogram(self.result), {'Low': 1, 'Medium': 1, 'High': 2})

    def test_strictest_tag_wins(self):
        schema = Schema((ColumnSpec('mixed', DISCRETE, frozenset(['public', 'PII'])),))
        self.assertEqual(classify_attributes(schema, RULES, KEYWORDS).level('mixed'), High)

    def test_override_wins(self):
        result = classify_attributes(SCHEMA, RULES, KEYWORDS, overrides={'farm_income': Low})
        self.assertEqual(result.level('farm_income'), Low)
        self.assertEqual(result['farm_income'].provenance.kind, EXPLICIT)

    def test_unknown_override(self):
        with self.assertRaises(ConfigError):
            classify_attributes(SCHEMA, RULES, KEYWORDS, overrides={'shoe_size': Low})

    def test_fail_safe(self):
        result = classify_attributes(SCHEMA.without_tags(), [], {})
        self.assertEqual({entry.level for _, entry in result.items()}, {High})

    def test_map_must_be_total(self):
        with self.assertRaises(InputError):
            SensitivityMap(SCHEMA, {})

    def test_map_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'map.yaml'
            save_sensitivity_map(self.result, path, header='# policyvault 0.1.0 seed=0 config=x')
            loaded = load_sensitivity_map(path, SCHEMA)
        self.assertEqual(loaded.to_dict(), self.result.to_dict())


class TestPrivacyBands(unittest.TestCase):
    def test_default_bands(self):
        result = classify_attributes(SCHEMA, RULES, KEYWORDS)
        bands = {band.attribute: band for band in privacy_bands(result)}
        self.assertEqual((bands['farm_income'].t_min, bands['farm_income'].t_max), (0.03, 0.12))
        self.assertEqual(bands['region'].t_min, 0.0)
        self.assertEqual((bands['plot_gps'].t_min, bands['plot_gps'].t_max), (0.01, 0.08))

    def test_inverted_band(self):
        with self.assertRaises(ConfigError):
            validate_band_config({High: (0.2, 0.1)})

    def test_floor_must_not_loosen(self):
        with self.assertRaises(ConfigError):
            validate_band_config({Low: (0.05, 0.1), Medium: (0.01, 0.08)})

    def test_contains(self):
        band = privacy_bands(SensitivityMap.uniform(SCHEMA, High))[0]
        self.assertTrue(band.contains(0.03))
        self.assertFalse(band.contains(0.13))


class TestSensitivityConfig(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text):
        path = self.dir / 'sensitivity.cfg'
        path.write_text(text, encoding='utf-8')
        return path

    def test_sections(self):
        config = load_sensitivity_config(self.write(
            "[tags]\nPII = farmer, personal\n"
            "[overrides]\nfarm_income = High\n"
            "[bands]\nHigh = 0.04, 0.2\n"
            "[distortion]\nHigh = 0.3, 0.1\n"
        ))
        self.assertEqual(config.tag_keywords, {'PII': ['farmer', 'personal']})
        self.assertEqual(config.overrides, {'farm_income': High})
        self.assertEqual(config.bands[High], (0.04, 0.2))
        self.assertEqual(config.bands[Low], (0.0, 0.05))
        self.assertEqual(config.distortion[High], (0.3, 0.1))

    def test_empty_file_gives_defaults(self):
        config = load_sensitivity_config(self.write(""))
        self.assertEqual(config.overrides, {})
        self.assertIn('PII', config.tag_keywords)
        self.assertEqual(config.bands[High], (0.03, 0.12))

    def test_unknown_level_cites_line(self):
        with self.assertRaises(ConfigError) as ctx:
            load_sensitivity_config(self.write("[overrides]\n\nfarm_income = Critical\n"))
        self.assertEqual(ctx.exception.line, 3)

    def test_unknown_section(self):
        with self.assertRaises(ConfigError):
            load_sensitivity_config(self.write("[levels]\nx = High\n"))


if __name__ == "__main__":
    unittest.main()
