import numpy as np
import pytest

from ladderctl import (ChirpProfile, EnsembleBounds, Permutation,
                       ValidationError, epsilon_sweep,
                       run_permutation_campaign, sample_ensemble)
from ladderctl.ensemble import run_transfer_campaign


def test_bounds_validation():
    with pytest.raises(ValidationError):
        EnsembleBounds(4, -1.0, 5.0, delta_bound=0.4)
    with pytest.raises(ValidationError):
        EnsembleBounds(4, 2.0, 1.0, delta_bound=0.4)
    with pytest.raises(ValidationError):
        EnsembleBounds(4, 1.0, 5.0)  # neither deltas nor bound
    with pytest.raises(ValidationError):
        EnsembleBounds(4, 1.0, 5.0, delta_bound=0.4,
                       fixed_deltas=(0.0,) * 4)  # both


def test_sample_ensemble_deterministic(inversion_bounds):
    a = sample_ensemble(inversion_bounds, 10, seed=42)
    b = sample_ensemble(inversion_bounds, 10, seed=42)
    for x, y in zip(a, b):
        assert x.mus == y.mus and x.deltas == y.deltas
    c = sample_ensemble(inversion_bounds, 10, seed=43)
    assert any(x.mus != y.mus for x, y in zip(a, c))


def test_sample_ensemble_ranges(inversion_bounds, fixed_delta_bounds):
    for member in sample_ensemble(inversion_bounds, 20, seed=1):
        assert all(1.0 <= m <= 5.0 for m in member.mus)
        assert all(-0.4 <= d <= 0.4 for d in member.deltas)
    fixed = sample_ensemble(fixed_delta_bounds, 5, seed=1)
    assert all(m.deltas == fixed_delta_bounds.fixed_deltas for m in fixed)
    mus = {m.mus for m in fixed}
    assert len(mus) == 5


def test_campaign_reversal_structure(inversion_bounds, inversion_chirp):
    report = run_permutation_campaign(inversion_bounds, Permutation.reversal(4),
                                      inversion_chirp, epsilon=10 ** -1.5,
                                      count=3, seed=42)
    assert report.count == 3
    assert len(report.per_system) == 3
    worst = max(max(e["fidelity"].values()) for e in report.per_system)
    assert report.worst_case == pytest.approx(worst)
    assert report.mean_case <= report.worst_case
    # one control for the whole ensemble, serialized with the report
    assert report.control["amplitude"]["zero_set"] == [0.0, 1.0]
    payload = report.to_dict()
    assert len(payload["per_system"]) == 3


def test_campaign_fixed_deltas_permutation(fixed_delta_bounds, demo_chirp):
    sigma = Permutation((1, 0, 2, 3))
    report = run_permutation_campaign(fixed_delta_bounds, sigma, demo_chirp,
                                      epsilon=1e-2, count=2, seed=7,
                                      calibrate=True)
    assert set(report.per_system[0]["fidelity"].keys()) == {0, 1, 2, 3}
    assert report.worst_entry_deviation <= np.sqrt(2.0)


def test_transfer_campaign(fixed_delta_bounds, demo_chirp):
    report = run_transfer_campaign(fixed_delta_bounds, 0, 2, demo_chirp,
                                   epsilon=1e-2, count=2, seed=7)
    entry = report.per_system[0]
    assert set(entry["fidelity"].keys()) == {0}
    assert 0.0 <= entry["transfer_population"] <= 1.0
    payload = report.to_dict()
    assert "transfer_population" in payload["per_system"][0]


def test_campaign_reports_reproducible(inversion_bounds, inversion_chirp):
    kwargs = dict(epsilon=10 ** -1.5, count=2, seed=42)
    a = run_permutation_campaign(inversion_bounds, Permutation.reversal(4),
                                 inversion_chirp, **kwargs)
    b = run_permutation_campaign(inversion_bounds, Permutation.reversal(4),
                                 inversion_chirp, **kwargs)
    assert a.to_dict() == b.to_dict()


def test_epsilon_sweep_structure(inversion_bounds, inversion_chirp):
    eps = [10 ** -1.0, 10 ** -1.5, 10 ** -2.0]
    result = epsilon_sweep(inversion_bounds, Permutation.reversal(4), inversion_chirp,
                           eps, count=2, seed=42)
    assert result.epsilons == eps
    assert len(result.worst_cases) == 3
    assert np.isfinite(result.slope)
    assert len(result.table()) == 3
    # shared members across rates: identical parameter draws in each report
    for rep in result.reports[1:]:
        assert rep.per_system[0]["mus"] == result.reports[0].per_system[0]["mus"]


def test_epsilon_sweep_validation(inversion_bounds, inversion_chirp):
    with pytest.raises(ValidationError):
        epsilon_sweep(inversion_bounds, Permutation.reversal(4), inversion_chirp,
                      [1e-2, 1e-3], count=1)
    with pytest.raises(ValidationError):
        epsilon_sweep(inversion_bounds, Permutation.reversal(4), inversion_chirp,
                      [1e-3, 1e-2, 1e-1], count=1)
