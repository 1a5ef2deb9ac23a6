import json

import numpy as np
import pytest

import sincount as sc
from sincount.errors import ValidationError


def test_theory_objective_inverse_random_family(scen_m4):
    result = sc.tune("pmep-ir", scen_m4, grid_points=9,
                     search_range=(0.1, 0.5))
    assert 0.1 <= result.kappa_opt <= 0.5
    assert result.objective == "abridged_theory"
    assert 0.0 < result.objective_value < 0.1
    assert result.consistency_ok
    assert not result.flat
    assert len(result.search_trace) >= 9
    values = [v for _, v in result.search_trace]
    # refinement can only improve on the grid scan
    assert result.objective_value <= min(values) + 1e-12


def test_family_accepts_spec_instance(scen_m4):
    result = sc.tune(sc.PmepIr(0.3), scen_m4, grid_points=5,
                     search_range=(0.2, 0.3), refine=False)
    assert result.family == "pmep-ir"


def test_unknown_family_rejected(scen_m4):
    with pytest.raises(ValidationError):
        sc.tune("gic", scen_m4)
    with pytest.raises(ValidationError):
        sc.tune("nope", scen_m4)


def test_unknown_objective_rejected(scen_m4):
    with pytest.raises(ValidationError):
        sc.tune("pmep-ir", scen_m4, objective="exhaustive")


def test_single_point_range(scen_m4):
    result = sc.tune("pmep-ir", scen_m4, search_range=(0.25, 0.25))
    assert result.kappa_opt == 0.25
    assert len(result.search_trace) == 1


def test_monte_carlo_objective(scen_m4):
    result = sc.tune("pmep-ir", scen_m4, objective="monte_carlo",
                     grid_points=5, search_range=(0.15, 0.35), refine=False,
                     trials=2000, master_seed=3)
    assert 0.15 <= result.kappa_opt <= 0.35
    assert result.objective == "monte_carlo"
    assert 0.0 <= result.objective_value < 0.2


def test_flat_objective_flagged():
    # far above threshold every trial succeeds for any kappa in range:
    # the sweep is exactly flat and the midpoint is reported
    scen = sc.standard_scenario(20.0)
    result = sc.tune("pmep-ir", scen, objective="monte_carlo", grid_points=5,
                     search_range=(0.15, 0.35), refine=False, trials=300,
                     master_seed=1)
    assert result.flat
    assert result.kappa_opt == pytest.approx(0.25, rel=1e-12)


def test_result_to_dict_json(scen_m4):
    result = sc.tune("pmep-i", scen_m4, grid_points=3, search_range=(2.5, 3.5),
                     refine=False)
    doc = json.loads(json.dumps(result.to_dict()))
    assert doc["family"] == "pmep-i"
    assert doc["consistency_ok"] is True
    assert len(doc["search_trace"]) == 3
