import json
import math
import os
from fractions import Fraction

import pytest

import wellflow_py as wf

DATA = os.environ.get("WELLFLOW_DATA", os.path.join(os.path.dirname(__file__), "..", "data"))


def load(name):
    with open(os.path.join(DATA, name)) as f:
        return f.read()


def test_simulate_flow_rotation():
    out = json.loads(wf.simulate_flow(load("rotation.flow.json"), [0.0, 0.0], 1.0, 1e-3))
    assert out["times"][-1] == pytest.approx(1.0)
    x = out["points"][-1]  # coordinates are reduced mod 1
    assert x[0] % 1.0 == pytest.approx(0.0, abs=1e-9)
    assert x[1] == pytest.approx(0.41421356, abs=1e-8)


def test_simulate_well_harmonic():
    out = json.loads(wf.simulate_well(load("harmonic.potential.json"), [1.0], [0.0], math.pi, 1e-4))
    assert out["q"][0] == pytest.approx(math.cos(math.pi), abs=1e-6)
    assert out["energy_final"] == pytest.approx(out["energy_initial"], abs=1e-7)


def test_check_adapted_strong():
    out = json.loads(wf.check_adapted(load("circle.flow.json"), load("halfsin.form.json")))
    assert out["classification"] == "strong"
    assert out["min_thetaY"] > 0.4


def test_certify_feasible_and_infeasible():
    feas = json.loads(wf.certify(load("rotation.flow.json"), 0, "1/1000", 64))
    assert feas["verdict"] == "feasible"
    infeas = json.loads(wf.certify(load("bryant.flow.json"), 0, "1/1000", 64))
    assert infeas["verdict"] == "infeasible-at-degree"
    assert infeas["farkas"]["residual"] == "0"
    assert Fraction(infeas["farkas"]["gap"]) > 0


def test_average_recovers_strong_form():
    out = json.loads(wf.average(load("circle.flow.json"), load("halfsin.form.json"), 256))
    assert out["classification"] == "strong"
    assert out["fit_residual"] < 1e-9


def test_tm_run_and_orbit_agree():
    tm = load("incrementer.tm.json")
    tape = load("ones.tape.json")
    run = json.loads(wf.tm_run(tm, tape, 1000))
    assert run["halted"] and run["steps"] == 3
    orbit = json.loads(wf.tm_orbit(tm, tape, 10000, 1000))
    assert orbit["entered_U"] and orbit["step_index"] == 3


def test_tm_orbit_budget_on_selfloop():
    out = json.loads(wf.tm_orbit(load("selfloop.tm.json"), load("ones.tape.json"), 10000, 200))
    assert not out["symbolic_halted"]
    assert out["budget_exhausted"]
    assert out["min_distance_to_U"] >= 0.01


def test_shift_check():
    assert wf.shift_check(load("ones.tape.json"), 10000)
    assert wf.shift_check(json.dumps({"window": [3, 1, 4, 1, 5], "first_index": -2}), 10000)
