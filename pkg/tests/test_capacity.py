import json
from importlib.resources import files
from pathlib import Path

import numpy as np
import pytest

from qcapacity.capacity import (
    EnsembleObjective,
    OptimizerConfig,
    evaluate_witness,
    fd_gradient,
    holevo_minimax,
    joint_q1,
    n_copy_q1,
    product_warm_start,
    q1,
)
from qcapacity.channels import (
    amplitude_damping,
    complementary,
    depolarizing,
    erasure,
    identity,
    load_channel,
    phase_damping,
    tensor_channels,
)
from qcapacity.entropy_measures import coherent_information, holevo_chi, relative_entropy
from qcapacity.errors import BadParam, DimTooLarge
from qcapacity.states import average_state, random_state

FAST = OptimizerConfig(restarts=4)
FIXTURES = Path(__file__).parent / "fixtures"


def h2(x):
    x = np.clip(x, 1e-300, 1.0)
    y = np.clip(1 - x, 1e-300, 1.0)
    return -x * np.log2(x) - y * np.log2(y)


def amplitude_damping_oracle(gamma, points=100_001):
    """Best coherent information over diagonal inputs diag(1 - t, t)."""
    t = np.linspace(0, 1, points)
    return float(np.max(h2((1 - gamma) * t) - h2(gamma * t)))


def random_input_oracle(ch, samples=2000, seed=0):
    return max(coherent_information(random_state(ch.dim_in, seed=seed + s), ch).value for s in range(samples))


def test_config_validation():
    cfg = OptimizerConfig()
    assert (cfg.restarts, cfg.max_iters, cfg.step_init, cfg.conv_tol, cfg.seed) == (32, 2000, 0.1, 1e-9, 0)
    assert cfg.members(3) == 9
    assert OptimizerConfig(ensemble_size=2).members(3) == 2
    for bad in ({"restarts": 0}, {"max_iters": 0}, {"conv_tol": 0.5}, {"conv_tol": 0}, {"ensemble_size": 0}, {"gradient": "exact"}):
        with pytest.raises(BadParam):
            OptimizerConfig(**bad)


@pytest.mark.parametrize("member_term,members,rank", [(False, 1, 2), (True, 4, 2), (True, 3, 1)])
def test_analytic_gradient_matches_finite_differences(member_term, members, rank):
    ch = amplitude_damping(0.3)
    obj = EnsembleObjective((ch, complementary(ch)), (1.0, -1.0), 2, members, rank, member_term=member_term)
    x = np.random.default_rng(0).standard_normal(obj.n_params)
    f, g = obj.evaluate(x)
    assert f == obj.value(x)
    assert np.allclose(g, fd_gradient(obj.value, x), atol=1e-7)


def test_holevo_objective_gradient():
    ch = depolarizing(0.3, 3)
    obj = EnsembleObjective((ch,), (1.0,), 3, 5, 1, member_term=True)
    x = np.random.default_rng(1).standard_normal(obj.n_params)
    _, g = obj.evaluate(x)
    assert np.allclose(g, fd_gradient(obj.value, x), atol=1e-7)


def test_q1_identity():
    rep = q1(identity(2), FAST)
    assert abs(rep.value - 1.0) <= 1e-6
    assert rep.converged


@pytest.mark.parametrize("p", [0.1, 0.25, 0.4])
def test_q1_erasure(p):
    rep = q1(erasure(2, p), FAST)
    assert abs(rep.value - (1 - 2 * p)) <= 1e-3


def test_q1_half_erasure_is_zero():
    rep = q1(erasure(2, 0.5), FAST)
    assert rep.value <= 1e-6
    assert max(rep.per_restart_values) <= 1e-6


@pytest.mark.parametrize("gamma", [0.0, 0.1, 0.2, 0.35])
def test_q1_amplitude_damping_grid_oracle(gamma):
    rep = q1(amplitude_damping(gamma), FAST)
    oracle = amplitude_damping_oracle(gamma)
    assert rep.value >= oracle - 1e-8
    assert rep.value <= oracle + 1e-6


@pytest.mark.parametrize("ch", [depolarizing(0.1), phase_damping(0.3), erasure(3, 0.2)], ids=lambda c: c.name)
def test_q1_beats_random_inputs(ch):
    rep = q1(ch, FAST)
    assert rep.value >= random_input_oracle(ch, samples=500) - 1e-9


def test_q1_depolarizing_matches_hashing_value():
    # the maximally mixed input is optimal for the qubit depolarizing channel
    p = 0.1
    f = 1 - 3 * p / 4
    w = np.array([f, p / 4, p / 4, p / 4])
    expected = 1 + np.sum(w * np.log2(w))
    assert abs(q1(depolarizing(p), FAST).value - expected) <= 1e-6


@pytest.mark.parametrize("ch", [identity(2), erasure(2, 0.25), amplitude_damping(0.3), depolarizing(0.1)], ids=lambda c: c.name)
def test_witness_reproduces_value(ch):
    rep = q1(ch, FAST)
    assert abs(evaluate_witness(rep, ch) - rep.raw_value) <= 1e-10
    assert abs(coherent_information(rep.optimal_single_state, ch).value - max(rep.single_values)) <= 1e-10


def test_clipping_contract():
    # one restart from the maximally mixed input, a stationary point with negative value
    ch = load_channel(files("qcapacity") / "data" / "ppt_channel.json")
    rep = q1(ch, OptimizerConfig(restarts=1))
    assert rep.raw_value < -0.5
    assert rep.value == 0.0
    assert rep.per_restart_values == [rep.raw_value]


def test_pure_inputs_give_zero_not_negative():
    rep = q1(amplitude_damping(0.8), FAST)
    assert 0.0 <= rep.value <= 1e-9
    assert rep.value == max(0.0, rep.raw_value)
    assert len(rep.per_restart_values) == FAST.restarts
    assert min(rep.single_values) < 0


def test_report_layout():
    rep = q1(erasure(2, 0.25), FAST)
    assert rep.form in ("single", "ensemble")
    assert rep.value == max(0.0, max(rep.per_restart_values))
    assert len(rep.optimal_input) == FAST.members(2)
    assert rep.joint_input.dim == 2
    doc = rep.to_dict()
    json.dumps(doc)
    assert doc["optimal_single_state"]["dim"] == 2
    assert "optimal_input" not in rep.to_dict(include_states=False)


def test_determinism():
    a = q1(amplitude_damping(0.2), FAST).to_dict()
    b = q1(amplitude_damping(0.2), FAST).to_dict()
    assert json.dumps(a) == json.dumps(b)


def test_workers_do_not_change_result():
    a = q1(amplitude_damping(0.2), FAST).to_dict()
    b = q1(amplitude_damping(0.2), OptimizerConfig(restarts=4, workers=3)).to_dict()
    assert json.dumps(a) == json.dumps(b)


def test_finite_difference_mode():
    rep = q1(erasure(2, 0.25), OptimizerConfig(restarts=2, gradient="fd"))
    assert abs(rep.value - 0.5) <= 1e-3


def test_dim_cap():
    with pytest.raises(DimTooLarge):
        q1(identity(5), OptimizerConfig(max_dim_in=4))
    with pytest.raises(DimTooLarge):
        joint_q1(identity(3), identity(3), OptimizerConfig(max_dim_in=8))
    with pytest.raises(DimTooLarge):
        n_copy_q1(identity(2), 4, FAST)
    with pytest.raises(DimTooLarge):
        n_copy_q1(identity(3), 3, FAST)


def test_product_warm_start():
    ra, rb = q1(erasure(2, 0.25), FAST), q1(identity(2), FAST)
    single, ens = product_warm_start(ra, rb)
    assert np.allclose(single.matrix, np.kron(ra.optimal_single_state.matrix, rb.optimal_single_state.matrix))
    assert len(ens) == len(ra.optimal_input) * len(rb.optimal_input)
    assert np.isclose(ens.probs.sum(), 1.0)


def test_joint_warm_start_dominance():
    cfg = OptimizerConfig(restarts=2)
    a, b = erasure(2, 0.25), amplitude_damping(0.2)
    ra, rb = q1(a, cfg), q1(b, cfg)
    rep = joint_q1(a, b, cfg, report_a=ra, report_b=rb)
    assert rep.value >= ra.value + rb.value - 2e-3
    assert abs(evaluate_witness(rep, tensor_channels(a, b)) - rep.raw_value) <= 1e-10


def test_n_copy():
    cfg = OptimizerConfig(restarts=2)
    base = q1(erasure(2, 0.25), cfg)
    rep = n_copy_q1(erasure(2, 0.25), 2, cfg, base=base)
    assert rep.copies == 2
    assert abs(rep.value - 0.5) <= 5e-3
    assert rep.value >= base.value - 2e-3
    assert n_copy_q1(identity(2), 1, cfg).copies == 1


def test_n_copy_identity():
    rep = n_copy_q1(identity(2), 2, OptimizerConfig(restarts=2))
    assert abs(rep.value - 1.0) <= 1e-5


def test_holevo_identity_and_constant():
    rep = holevo_minimax(identity(2), FAST)
    assert abs(rep.value - 1.0) <= 1e-8
    assert rep.converged and rep.certificate_gap <= 1e-8
    rep = holevo_minimax(depolarizing(1.0), FAST)
    assert abs(rep.value) <= 1e-8


@pytest.mark.parametrize(
    "ch,expected",
    [
        (erasure(2, 0.3), 0.7),
        # 1 - h((1 + (1 - p)) / 2) for the qubit depolarizing channel
        (depolarizing(0.5), 1 - h2(0.25)),
        (phase_damping(0.4), 1.0),
    ],
    ids=lambda x: getattr(x, "name", ""),
)
def test_holevo_closed_forms(ch, expected):
    rep = holevo_minimax(ch, FAST)
    assert abs(rep.value - expected) <= 1e-7


def test_holevo_certificate():
    ch = amplitude_damping(0.3)
    rep = holevo_minimax(ch, FAST)
    assert rep.converged
    assert rep.certificate_gap <= 1e-8
    assert abs(holevo_chi(rep.optimal_input, ch) - rep.raw_value) <= 1e-10
    sigma = average_state(rep.optimal_input)
    out_sigma = ch(sigma)
    d = [relative_entropy(ch(s), out_sigma).value for _, s in rep.optimal_input]
    assert max(d) - rep.value <= 1e-8
    # the upper estimate sits at the value when the saddle is reached
    assert rep.radius_upper_estimate >= rep.value - 1e-9
    assert rep.radius_upper_estimate <= rep.value + 1e-6


def test_holevo_beats_bruteforce_fixture():
    doc = json.loads((FIXTURES / "holevo_bruteforce.json").read_text())
    rep = holevo_minimax(depolarizing(0.5), FAST)
    assert rep.value >= doc["channels"]["depolarizing(0.5)"]["best_chi"] - 1e-3


def test_holevo_determinism():
    a = holevo_minimax(amplitude_damping(0.3), FAST).to_dict()
    b = holevo_minimax(amplitude_damping(0.3), FAST).to_dict()
    assert json.dumps(a) == json.dumps(b)
