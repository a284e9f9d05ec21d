# ## @DOC
# ### Test Link Budget
# Tests the photodetector sensitivity solver, the laser power chain and the maximum VDPE size against scan oracles.



import io
import logging
import math
import sys
from pathlib import Path

import pytest

sys.path.append(str(Path(__file__).parent.parent / "bin"))
import MRR_combswitch as combswitch
import MRR_linkbudget as linkbudget
from MRR_archmodel import default_params
from MRR_errors import NonPhysical


def bisection_sensitivity(precision, bit_rate, params):
    """Plain bisection on the resolution equation, written out independently."""
    q, k = 1.602176634e-19, 1.380649e-23
    r = params.responsivity

    def bits(p):
        beta = math.sqrt(
            2 * q * (r * p + params.dark_current)
            + 4 * k * params.temperature / params.load_resistance
            + (r * p) ** 2 * 10 ** (params.rin / 10)
        )
        return (20 * math.log10(r * p / (beta * math.sqrt(bit_rate / math.sqrt(2)))) - 1.76) / 6.02

    lo, hi = 1e-12, 1.0
    for _ in range(300):
        mid = math.sqrt(lo * hi)
        if bits(mid) < precision:
            lo = mid
        else:
            hi = mid
    return hi


def linear_scan(org, precision, bit_rate, limit=512):
    params = default_params(org)
    p_pd = linkbudget.solve_pd_sensitivity(precision, bit_rate * 1e9, params).p_pd_opt
    budget = linkbudget.laser_power_budget(params)
    best = 0
    for n in range(1, limit + 1):
        if linkbudget.required_laser_power(n, n, p_pd, org, params) <= budget:
            best = n
    return best


def test_solver_matches_bisection_oracle():
    params = default_params("MAM")
    solution = linkbudget.solve_pd_sensitivity(4, 1e9, params)
    oracle = bisection_sensitivity(4, 1e9, params)
    assert solution.p_pd_opt == pytest.approx(oracle, rel=1e-3)


@pytest.mark.parametrize(
    "precision, bit_rate", [(p, 3e9) for p in range(1, 8)] + [(8, 1e9)]
)
def test_solution_reproduces_precision(precision, bit_rate):
    params = default_params("AMM")
    solution = linkbudget.solve_pd_sensitivity(precision, bit_rate, params)
    assert solution.p_pd_opt > 0
    assert solution.beta > 0
    assert solution.beta == pytest.approx(linkbudget.noise_beta(solution.p_pd_opt, params))
    achieved = linkbudget.effective_bits(solution.p_pd_opt, bit_rate, params)
    assert abs(achieved - precision) < 1e-9


def test_sensitivity_monotonic():
    params = default_params("MAM")
    solve = linkbudget.solve_pd_sensitivity
    assert solve(4, 1e9, params).p_pd_opt < solve(5, 1e9, params).p_pd_opt
    assert solve(4, 1e9, params).p_pd_opt < solve(4, 10e9, params).p_pd_opt


def test_solver_rejects_unreachable_precision():
    params = default_params("MAM")
    with pytest.raises(NonPhysical):
        linkbudget.solve_pd_sensitivity(40, 1e9, params)
    with pytest.raises(NonPhysical):
        linkbudget.solve_pd_sensitivity(4, 0, params)


def test_required_power_increases_with_n():
    for org in ("AMM", "MAM"):
        params = default_params(org)
        values = [
            linkbudget.required_laser_power(n, 8, 1e-5, org, params) for n in range(1, 200)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))


def test_single_vdpe_has_no_splitter_loss():
    params = default_params("MAM")
    base = linkbudget.loss_db(10, 1, "MAM", params)
    split = linkbudget.loss_db(10, 2, "MAM", params)
    assert split - base == pytest.approx(params.el_splitter + 10 * math.log10(2))


def test_amm_bus_crosses_banks_twice():
    params = default_params("MAM")
    delta = linkbudget.loss_db(11, 4, "AMM", params) - linkbudget.loss_db(11, 4, "MAM", params)
    expected = 11 * params.mrr_pitch_mm * params.il_wg + 10 * (params.obl_mrm + params.obl_mrr)
    assert delta == pytest.approx(expected)


def test_comb_switch_loss_only_for_reconfigurable():
    assert linkbudget.cs_insertion_loss("MAM", 44, 1) == 0.0
    assert linkbudget.cs_insertion_loss("RMAM", 43, 1) == pytest.approx(4 * 0.029)
    assert linkbudget.cs_insertion_loss("RAMM", 16, 5) == 0.0
    assert linkbudget.cs_insertion_loss("RMAM", 43, None) == 0.0


def test_budget_is_electrical():
    params = default_params("MAM")
    assert linkbudget.laser_power_budget(params) == pytest.approx(0.1)


@pytest.mark.parametrize(
    "org, bit_rate, expected",
    [
        ("MAM", 1, 44), ("MAM", 3, 28), ("MAM", 5, 22), ("MAM", 10, 16),
        ("AMM", 1, 31), ("AMM", 3, 20), ("AMM", 5, 16), ("AMM", 10, 12),
    ],
)
def test_fixed_organizations_reproduce_table(org, bit_rate, expected):
    assert abs(linkbudget.max_vdpe_size(org, 4, bit_rate) - expected) <= 1


@pytest.mark.parametrize(
    "org, bit_rate, expected",
    [
        ("RAMM", 1, 30), ("RAMM", 3, 20), ("RAMM", 5, 16),
        ("RMAM", 1, 43), ("RMAM", 3, 27), ("RMAM", 5, 22),
    ],
)
def test_reconfigurable_organizations(org, bit_rate, expected):
    assert linkbudget.max_vdpe_size(org, 4, bit_rate) == expected


def test_mean_loss_warning_is_logged_once(caplog):
    combswitch._warn_mean_loss.cache_clear()
    with caplog.at_level(logging.WARNING):
        linkbudget.max_vdpe_size("RAMM", 4, 5)
        linkbudget.max_vdpe_size("RAMM", 4, 5)
    warnings = [r for r in caplog.records if "no reference comb switch" in r.getMessage()]
    assert len(warnings) == 1


def test_one_bit_sizes():
    assert abs(linkbudget.max_vdpe_size("MAM", 1, 1) - 159) <= 2
    assert abs(linkbudget.max_vdpe_size("AMM", 1, 1) - 99) <= 2


def test_eight_bit_collapses():
    for org in ("MAM", "AMM"):
        assert linkbudget.max_vdpe_size(org, 8, 1) <= 1
        for bit_rate in (3, 5, 10):
            assert linkbudget.max_vdpe_size(org, 8, bit_rate) == 0


@pytest.mark.parametrize("org", ["AMM", "MAM"])
def test_matches_linear_scan(org):
    for bit_rate in (1, 3, 5, 10):
        assert linkbudget.max_vdpe_size(org, 4, bit_rate) == linear_scan(org, 4, bit_rate)
    for precision in range(1, 9):
        assert linkbudget.max_vdpe_size(org, precision, 1) == linear_scan(org, precision, 1)


def test_sweep_shape_and_monotonicity():
    points = linkbudget.scalability_sweep("MAM", set(range(1, 9)), {1, 3, 5, 10})
    assert len(points) == 32
    grid = {(p.precision, p.bit_rate): p.n_max for p in points}
    for (precision, bit_rate), n in grid.items():
        if precision < 8:
            assert grid[(precision + 1, bit_rate)] <= n
        if bit_rate != 10:
            following = {1: 3, 3: 5, 5: 10}[bit_rate]
            assert grid[(precision, following)] <= n
    assert all(p.received_power is not None for p in points if p.precision <= 4)
    assert grid[(8, 10)] == 0


def test_sweep_is_deterministic():
    first = linkbudget.scalability_sweep("AMM", {4}, {1, 5})
    second = linkbudget.scalability_sweep("AMM", {4}, {1, 5})
    assert first == second


def test_scalability_csv():
    stream = io.StringIO()
    linkbudget.write_scalability_csv(linkbudget.scalability_sweep("MAM", {4}, {1, 10}), stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == "organization,precision_bits,bit_rate_gbps,n_max,received_power_dbm"
    assert lines[1].startswith("MAM,4,1,44,")
    assert lines[2].startswith("MAM,4,10,16,")
