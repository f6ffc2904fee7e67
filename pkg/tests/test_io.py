import numpy as np
import pytest

from hbprm.ags import AgsConfig, run_ags
from hbprm.exceptions import DataError
from hbprm.io import (
    ingest_csv,
    read_coefficients_csv,
    write_coefficients_csv,
    write_dataset_csv,
    write_diagnostics_csv,
    write_draws_csv,
)
from hbprm.synth import SynthSpec, generate


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_three_row_file(tmp_path):
    p = _write(tmp_path, "group,x1,y\n1,0.5,3\n1,1.5,4\n2,2.0,1\n")
    data = ingest_csv(p)
    assert data.n_groups == 2 and data.n_per_group.tolist() == [2, 1]
    assert data.labels == ("1", "2")


def test_four_covariate_layout(tmp_path):
    rows = "\n".join(f"{g},{t},{t**2},{t**3},{n},{y}" for g, t, n, y in [(1, 0.5, 20, 6), (2, 1.1, 11, 3)])
    data = ingest_csv(_write(tmp_path, f"group,x1,x2,x3,x4,y\n{rows}\n"))
    assert data.n_covariates == 4


@pytest.mark.parametrize(
    "text, match",
    [
        ("", "empty"),
        ("group,x1,y\n", "no data"),
        ("group,x1\n1,2\n", "header"),
        ("group,x2,y\n1,2,3\n", "x1"),
        ("group,x1,y\n1,0.5,2.5\n", "line 2.*not an integer"),
        ("group,x1,y\n1,0.5,3\n1,0.5,-1\n", "line 3.*negative"),
        ("group,x1,y\n1,0.5,3\n1,abc,1\n", "line 3"),
        ("group,x1,y\n1,0.5\n", "line 2"),
        ("group,x1,y\n1,0.5,3\n2,0.1,0\n", "line 3.*zero"),
    ],
)
def test_ingest_errors(tmp_path, text, match):
    with pytest.raises(DataError, match=match):
        ingest_csv(_write(tmp_path, text))


def test_shift_counts(tmp_path):
    p = _write(tmp_path, "group,x1,y\n1,0.5,0\n1,1.0,2\n")
    assert ingest_csv(p, shift_counts=1).y.tolist() == [1, 3]


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        ingest_csv(tmp_path / "nope.csv")


def test_dataset_round_trip(tmp_path):
    data, w = generate(SynthSpec("large", J=3, n_per_group=5, K=3, seed=2))
    write_dataset_csv(tmp_path / "s.csv", data)
    write_coefficients_csv(tmp_path / "c.csv", w, data.labels)
    back = ingest_csv(tmp_path / "s.csv")
    np.testing.assert_array_equal(back.x, data.x)
    np.testing.assert_array_equal(back.y, data.y)
    labels, w_back = read_coefficients_csv(tmp_path / "c.csv")
    assert labels == ["1", "2", "3"]
    np.testing.assert_array_equal(w_back, w)


def test_draws_csv_layout(tmp_path):
    data, _ = generate(SynthSpec("large", J=2, n_per_group=4, K=1, seed=1))
    out = run_ags(data, config=AgsConfig(5, 3, 2, seed=0))
    p = write_draws_csv(tmp_path / "draws.csv", out)
    lines = p.read_text().splitlines()
    assert lines[0] == "chain,iteration,parameter,value"
    assert len(lines) == 1 + 2 * 3 * (2 * 1 + 2)
    assert lines[1].startswith('1,1,"w[1,1]",')
    assert float(lines[1].rsplit(",", 1)[1]) == out.w[0, 0, 0, 0]


def test_diagnostics_na(tmp_path):
    p = write_diagnostics_csv(tmp_path / "d.csv", [["s", "ags", 10, 1, 2, None, None, 0.5, 1.25]])
    assert p.read_text().splitlines()[1] == "s,ags,10,1,2,NA,NA,0.5,1.25"
