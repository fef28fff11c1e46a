import json
from dataclasses import dataclass
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

from src.utils.exceptions import ConfigError
from src.utils.helper_data import (
    build_report, load_json_config, to_jsonable, write_csv, write_json_report
)
from src.utils.static import REPORT_VERSION


@dataclass
class Sample:
    word: str
    value: complex
    matrix: np.ndarray


@pytest.fixture
def sample():
    """Petite dataclass mêlant complexe et tableau numpy."""
    return Sample("ab", 1 - 2j, np.eye(2))


def test_to_jsonable_converts_numbers_and_containers(sample):
    converted = to_jsonable({"sample": sample, 3: (np.int64(4), np.float64(0.5), np.bool_(True))})
    assert converted == {
        "sample": {"word": "ab", "value": [1.0, -2.0], "matrix": [[1.0, 0.0], [0.0, 1.0]]},
        "3": [4, 0.5, True],
    }


def test_to_jsonable_falls_back_to_str():
    assert to_jsonable(None) is None
    assert to_jsonable(object.__new__(type("Opaque", (), {"__str__": lambda self: "opaque"}))) == "opaque"


def test_build_report_schema(sample):
    report = build_report("bend", {"seed": 0}, {"sample": sample}, ["attention"])
    assert report["version"] == REPORT_VERSION
    assert report["experiment"] == "bend"
    assert report["config"] == {"seed": 0}
    assert report["results"]["sample"]["value"] == [1.0, -2.0]
    assert report["warnings"] == ["attention"]
    assert build_report("bend", {}, {})["warnings"] == []


def test_write_json_report_round_trip(tmp_path, sample):
    path = tmp_path / "out" / "bend.json"
    written = write_json_report(str(path), build_report("bend", {}, {"sample": sample}))
    assert written == str(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["results"]["sample"]["word"] == "ab"
    assert path.read_text(encoding="utf-8").endswith("\n")


def test_write_json_report_logs_errors(tmp_path):
    with patch("builtins.open", side_effect=PermissionError("refusé")), \
            patch("logging.error") as mock_error:
        with pytest.raises(PermissionError):
            write_json_report(str(tmp_path / "r.json"), {})
        mock_error.assert_called_once()
        assert "Erreur lors de l'écriture du rapport" in mock_error.call_args[0][0]


def test_write_csv_from_rows_and_frame(tmp_path):
    rows = [{"word": "a", "length": 1.5}, {"word": "ab", "length": 2.5}]
    path = write_csv(str(tmp_path / "rows.csv"), rows)
    pd.testing.assert_frame_equal(pd.read_csv(path), pd.DataFrame(rows))
    frame = pd.DataFrame({"L": [0.5, 1.0]})
    path = write_csv(str(tmp_path / "nested" / "frame.csv"), frame)
    assert open(path, encoding="utf-8").readline().strip() == "L"


def test_write_csv_logs_errors(tmp_path):
    with patch("pandas.DataFrame.to_csv", side_effect=OSError("disque plein")), \
            patch("logging.error") as mock_error:
        with pytest.raises(OSError):
            write_csv(str(tmp_path / "t.csv"), [{"a": 1}])
        mock_error.assert_called_once()


def test_load_json_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"experiment": "bend", "seed": 3}', encoding="utf-8")
    assert load_json_config(str(path)) == {"experiment": "bend", "seed": 3}


@pytest.mark.parametrize("content, message", [
    ('{"seed": 3,\n "depth": }', "ligne 2"),
    ("[1, 2]", "objet JSON"),
])
def test_load_json_config_errors(tmp_path, content, message):
    path = tmp_path / "config.json"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ConfigError) as error:
        load_json_config(str(path))
    assert message in str(error.value)
    assert error.value.field == "config"


def test_load_json_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="introuvable"):
        load_json_config(str(tmp_path / "absent.json"))
