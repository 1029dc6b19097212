import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slitwave.core import Grid2D, PacketParams, SlitGeometry
from slitwave.exceptions import InvalidInputError
from slitwave.kirchhoff import ContourSpec
from slitwave.presets import Checks, ExperimentPreset, Probe, export_config
from slitwave.runner import (
    OUTPUT_ENV,
    ComparisonReport,
    Metric,
    compare_run_dir,
    mismatch,
    output_dir,
    run_preset,
)
from slitwave.tdse import Profile1D, StepperConfig, read_profile


def _prof(coords, amps):
    return Profile1D("y", 1.0, np.asarray(coords, float), np.asarray(amps, float))


amps = st.lists(st.floats(0, 5), min_size=11, max_size=11)
COORDS = np.linspace(-1, 1, 11)


@settings(max_examples=100, deadline=None)
@given(a=amps, b=amps, c=amps)
def test_mismatch_is_a_metric(a, b, c):
    pa, pb, pc = _prof(COORDS, a), _prof(COORDS, b), _prof(COORDS, c)
    for m in Metric:
        assert mismatch(pa, pa, m) == 0
        assert mismatch(pa, pb, m) == pytest.approx(mismatch(pb, pa, m), abs=1e-12)
        assert mismatch(pa, pc, m) <= mismatch(pa, pb, m) + mismatch(pb, pc, m) + 1e-9


def test_mismatch_exact_l2_of_interpolants():
    # difference is the hat-free line d(y) = y on [0, 2]; its L2 norm is sqrt(8/3)
    a = _prof([0.0, 2.0], [0.0, 2.0])
    b = _prof([0.0, 1.0, 2.0], [0.0, 0.0, 0.0])
    assert mismatch(a, b) == pytest.approx(math.sqrt(8 / 3), rel=1e-14)
    assert mismatch(a, b, "MaxNorm") == 2.0
    # only the overlap counts
    c = _prof([1.0, 5.0], [0.0, 0.0])
    assert mismatch(a, c) == pytest.approx(math.sqrt((8 - 1) / 3), rel=1e-14)


def test_mismatch_rejects_disjoint_ranges():
    with pytest.raises(InvalidInputError):
        mismatch(_prof([0, 1], [1, 1]), _prof([2, 3], [1, 1]))
    with pytest.raises(ValueError):
        mismatch(_prof([0, 1], [1, 1]), _prof([0, 1], [1, 1]), "L1")


def test_report_round_trip(tmp_path):
    r = ComparisonReport("demo", value_plain=0.5, value_cavity=0.25, peak_counts={"tdse:a": 3})
    r.add_check("norm", True, "fine")
    r.add_check("peaks", False)
    assert not r.passed
    back = ComparisonReport.from_json(r.to_json())
    assert back == r
    path = r.write(tmp_path)
    assert path.name == "demo_report.json"
    assert json.loads(path.read_text())["passed"] is False


def test_output_dir_resolution(monkeypatch, tmp_path):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    assert output_dir().name == "slitwave-out"
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert output_dir() == tmp_path
    assert output_dir(tmp_path / "x") == tmp_path / "x"


SMALL = ExperimentPreset(
    "small",
    PacketParams(-6.0, 0.0, 0.2, 0.0, 1.0, 1.0, 10.0),
    SlitGeometry.single(1.0, 2.0),
    ("tdse", "kirchhoff", "cavity"),
    40.0,
    (Probe("forward", axis="y", at=6.0, lo=-8.0, hi=8.0, min_peaks=1, check_on="tdse"),),
    Grid2D(-16.0, 16.0, -12.0, 12.0, 128, 128),
    StepperConfig(dt=0.05, t_final=40.0, snapshot_stride=100),
    ContourSpec(1e-2, 2000),
    checks=Checks(norm_tolerance=1e-9),
)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    return out, run_preset(SMALL, out)


def test_run_preset_outputs(small_run):
    out, report = small_run
    assert report.checks["norm"]["passed"]
    assert report.norm_drift < 1e-9
    assert set(report.peak_counts) == {"tdse:forward", "kirchhoff:forward", "cavity:forward"}
    assert report.value_plain is not None and report.value_cavity is not None
    names = sorted(p.name for p in out.iterdir())
    assert "small_report.json" in names
    assert "small_t40_tdse-forward.csv" in names
    assert "small_t40_amplitude.bin" in names and "small_t40_amplitude.hdr" in names
    tdse = read_profile(out / "small_t40_tdse-forward.csv")
    kir = read_profile(out / "small_t40_kirchhoff-forward.csv")
    assert np.array_equal(tdse.coords, kir.coords)
    assert tdse.amps[np.argmin(np.abs(tdse.coords))] == 1.0


def test_compare_run_dir_recomputes_mismatch(small_run):
    out, report = small_run
    again = compare_run_dir(out)["small"]
    assert again["kirchhoff:forward"] == pytest.approx(report.mismatches["kirchhoff:forward"], rel=1e-12)
    assert again["cavity:forward"] == pytest.approx(report.mismatches["cavity:forward"], rel=1e-12)
    mx = compare_run_dir(out, Metric.MAXNORM)["small"]
    assert set(mx) == set(again)
    with pytest.raises(InvalidInputError):
        compare_run_dir(out / "nowhere")


def test_run_from_config_path_without_writing(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(export_config(SMALL))
    report = run_preset(path, tmp_path / "o", jobs=("tdse",), write=False)
    assert not (tmp_path / "o").exists()
    assert report.files == []
    assert report.checks["peaks:tdse:forward"]["passed"]
    with pytest.raises(InvalidInputError):
        run_preset(SMALL.__class__(**{**SMALL.__dict__, "jobs": ("tdse",)}), jobs=("kirchhoff",), write=False)
