import json

import numpy as np
import pytest

from bosonchain.cli import OracleReport
from bosonchain.functions import MonomialFunction
from bosonchain.interference import PathLattice, run_interference
from bosonchain.model import ChainSpec, Displacement
from bosonchain.tables import emit_table, read_csv, read_json
from bosonchain.transfer import TransferReport, run_dressed_transfer, run_transfer


@pytest.fixture
def reports():
    out = [run_transfer(ChainSpec.engineered(N, J=0.9), MonomialFunction.monomial(1)) for N in (3, 4, 6)]
    return out


def test_single_report_csv_has_header_and_one_row(tmp_path, reports):
    text = emit_table(reports[:1], "csv", tmp_path / "t.csv")
    lines = text.strip().splitlines()
    assert len(lines) == 2
    header = lines[0].split(",")
    assert header[:4] == ["experiment", "N", "n", "sector"]
    assert "signature_re" in header and "signature_im" in header
    assert (tmp_path / "t.csv").read_text() == text


def test_csv_round_trip_is_exact(tmp_path, reports):
    dressed = run_dressed_transfer(ChainSpec.engineered(3), Displacement(0.2 - 0.1j),
                                   MonomialFunction.monomial(1), 5)
    for batch in (reports, [dressed]):
        emit_table(batch, "csv", tmp_path / "r.csv")
        rows = read_csv(tmp_path / "r.csv")
        for row, rep in zip(rows, batch):
            assert row == rep.to_dict()


def test_json_round_trip_is_exact(tmp_path, reports):
    emit_table(reports, "json", tmp_path / "r.json")
    rows = read_json(tmp_path / "r.json")
    for row, rep in zip(rows, reports):
        d = rep.to_dict()
        for key, value in d.items():
            if isinstance(value, complex):
                assert complex(*row[key]) == value
            else:
                assert row[key] == value


def test_interference_profile_table(tmp_path):
    profiles = [run_interference(PathLattice.from_lengths((5, n))) for n in (6, 7, 8)]
    emit_table(profiles, "csv", tmp_path / "i.csv")
    rows = read_csv(tmp_path / "i.csv")
    assert [r["lengths"] for r in rows] == [[5, 6], [5, 7], [5, 8]]
    for row, p in zip(rows, profiles):
        assert row["interference_factor"] == p.interference_factor
        assert row["receiver_amplitude"] == p.receiver_amplitude
        assert row["per_path"] == [list(map(float, q)) for q in p.per_path]


def test_mixed_types_rejected(reports):
    with pytest.raises(TypeError):
        emit_table([reports[0], OracleReport(2, 1.0, 3, 0.0)], "csv")


def test_unknown_format(reports):
    with pytest.raises(ValueError):
        emit_table(reports, "xml")


def test_unwritable_path(tmp_path, reports):
    with pytest.raises(OSError):
        emit_table(reports, "json", tmp_path / "missing" / "dir" / "x.json")


def test_seventeen_digit_floats(tmp_path):
    rep = OracleReport(3, 0.1 + 0.2, 4, np.float64(1 / 3))
    text = emit_table([rep], "csv")
    assert "0.30000000000000004" in text
    assert "0.33333333333333331" in text
    assert json.loads(emit_table([rep], "json"))[0]["J"] == 0.1 + 0.2


def test_empty_table():
    assert emit_table([], "csv") == ""
    assert json.loads(emit_table([], "json")) == []


def test_bool_cells(tmp_path, reports):
    text = emit_table(reports[:1], "csv")
    assert ",true,true," in text
    assert TransferReport.field_names()[-1] == "note"
