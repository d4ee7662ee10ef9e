import json
import math

import numpy as np
import pytest

import lorenzkit as lk


def test_vector_field():
    assert lk.vector_field([1.0, 2.0, 3.0], r=28.0) == pytest.approx([10.0, 23.0, -6.0])


def test_equilibria_at_28():
    eq = lk.equilibria(28.0)
    assert [e["name"] for e in eq] == ["O", "O1", "O2"]
    for e in eq:
        total = sum(v["re"] for v in e["eigenvalues"])
        assert total == pytest.approx(-(10.0 + 1.0 + 8.0 / 3.0), abs=1e-9)


def test_hopf_value():
    assert lk.find_hopf_numeric(10.0, 8.0 / 3.0, (20.0, 30.0)) == pytest.approx(470.0 / 19.0, abs=1e-6)


def test_validation_maps_to_value_error():
    with pytest.raises(ValueError):
        lk.equilibria(28.0, sigma=-1.0)
    with pytest.raises(lk.BracketError):
        lk.find_homoclinic_r((20.0, 22.0))
    assert issubclass(lk.BracketError, lk.LorenzError)


def test_integrate_returns_rows():
    rows = lk.integrate([1.0, 1.0, 1.0], r=28.0, t_max=5.0)
    assert isinstance(rows, np.ndarray)
    assert rows.shape[1] == 4
    assert rows[0, 0] == 0.0
    assert rows[-1, 0] == pytest.approx(5.0)


def test_separatrix_fate_below_homoclinic_value():
    assert lk.separatrix_fate(10.0)["verdict"] == "converges-to-O1"


def test_return_map_and_thinness():
    pairs = lk.return_map(28.0, n=300)
    assert pairs.shape == (299, 2)
    np.testing.assert_array_equal(pairs[1:, 0], pairs[:-1, 1])
    assert lk.return_map_thinness(pairs)["range"] > 10.0


def test_lyapunov_sum_matches_divergence():
    s = lk.lyapunov_spectrum(28.0, transient=20.0, total=200.0)
    assert sum(s["exponents"]) == pytest.approx(-41.0 / 3.0, abs=1e-3)
    assert s["exponents"][0] > 0.5


def test_stable_cycle_at_350():
    res = lk.cycle_search(350.0, budget=20)
    stable = [o for o in res["orbits"] if o["stability"] == "stable"]
    assert len(stable) == 1
    assert stable[0]["symmetric"]


def test_run_cli(tmp_path):
    code, out, err = lk.run_cli(["equilibria", "--r", "28", "--out", str(tmp_path)])
    assert code == 0, err
    assert len(json.loads(out)["equilibria"]) == 3
    assert (tmp_path / "manifest.json").exists()
    code, _, err = lk.run_cli(["equilibria", "--r", "28", "--sigma", "-1"])
    assert code == 2
    assert "sigma" in err
