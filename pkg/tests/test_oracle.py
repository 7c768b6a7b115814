"""Birth-death chain construction, solvers, and agreement with closed forms."""

import math
import pickle

import numpy as np
import pytest

from diffstop.diffusion import make_drift_bm, make_sticky_bm
from diffstop.errors import ConvergenceError, DomainError, ParameterError
from diffstop.oracle import compare, discretize, solve_chain_stopping
from diffstop.stopping import solve_threshold, value_function

STICKY = make_sticky_bm(0.0, 1.0)


class TestDiscretize:
    def test_atom_node_mass(self):
        chain = discretize(STICKY, -5.0, 5.0, 2001)
        i = chain.node_index(0.0)
        h = chain.nodes[i + 1] - chain.nodes[i - 1]
        # density 2 over the surrounding half-cells plus the atom 2c
        assert chain.node_mass[i] == pytest.approx(h + 2.0, rel=1e-12)

    @pytest.mark.parametrize("n", [100, 101, 2000, 2001])
    def test_atom_on_grid_for_any_parity(self, n):
        chain = discretize(STICKY, -5.0, 5.0, n)
        assert 0.0 in chain.nodes

    def test_drift_masses_decreasing(self):
        spec = make_drift_bm(-0.25)
        chain = discretize(spec, -5.0, 5.0, 1001)
        interior = chain.node_mass[1:-1]
        assert np.all(np.diff(interior) < 0)

    def test_total_mass_matches_speed_of_set(self):
        from diffstop.diffusion import speed_of_set
        chain = discretize(STICKY, -3.0, 3.0, 301)
        assert chain.node_mass.sum() == pytest.approx(
            speed_of_set(STICKY, -3.0, 3.0), rel=1e-12)

    def test_window_and_size_validation(self):
        with pytest.raises(ParameterError):
            discretize(STICKY, -5.0, 5.0, 49)
        with pytest.raises(DomainError):
            discretize(STICKY, 0.5, 5.0, 101)    # atom outside window
        rk = __import__("diffstop").make_reflected_killed_bm()
        with pytest.raises(DomainError):
            discretize(rk, -1.0, 0.9, 101)


class TestSolvers:
    def test_zero_reward(self):
        chain = discretize(STICKY, -4.0, 4.0, 201, reward=lambda x: 0.0 * np.asarray(x))
        sol = solve_chain_stopping(chain, 0.5)
        assert np.all(sol.values == 0.0)

    def test_unit_reward_stops_immediately(self):
        chain = discretize(STICKY, -4.0, 4.0, 201,
                           reward=lambda x: np.ones_like(np.asarray(x, dtype=float)))
        sol = solve_chain_stopping(chain, 0.5)
        assert np.all(sol.values == 1.0)

    def test_value_and_policy_iteration_agree(self):
        # value iteration stops on the sup-change, leaving roughly
        # change/(1 - contraction) distance to the fixed point
        chain = discretize(STICKY, -6.0, 6.0, 201)
        a = solve_chain_stopping(chain, 0.5, method="value")
        b = solve_chain_stopping(chain, 0.5, method="policy")
        assert np.max(np.abs(a.values - b.values)) <= 1e-7

    def test_auto_prefers_policy_on_fine_grids(self):
        chain = discretize(STICKY, -6.0, 6.0, 2001)
        sol = solve_chain_stopping(chain, 0.5)
        assert sol.method == "policy"
        assert sol.residual <= 1e-10

    def test_chain_value_is_superharmonic_majorant(self):
        chain = discretize(STICKY, -6.0, 6.0, 801)
        sol = solve_chain_stopping(chain, 0.25)
        v = sol.values
        assert np.all(v >= chain.reward - 1e-11)
        denom = 0.25 + chain.up_rate + chain.down_rate
        cont = (chain.up_rate * v[2:] + chain.down_rate * v[:-2]) / denom
        assert np.all(cont <= v[1:-1] + 1e-11)

    def test_nonconvergence_reported_with_residual(self):
        chain = discretize(STICKY, -6.0, 6.0, 801)
        with pytest.raises(ConvergenceError) as err:
            solve_chain_stopping(chain, 0.25, method="value", max_iter=5)
        assert err.value.achieved is not None

    def test_deterministic_across_runs(self):
        chain = discretize(STICKY, -6.0, 6.0, 501)
        a = solve_chain_stopping(chain, 0.5)
        b = solve_chain_stopping(chain, 0.5)
        assert pickle.dumps(a.values) == pickle.dumps(b.values)


class TestAgreement:
    def test_matches_analytic_value_at_half(self):
        chain = discretize(STICKY, -6.0, 6.0, 4001)
        sol = solve_chain_stopping(chain, 0.5)
        rep = compare(chain, sol.values, lambda x: value_function(0.5, 1.0, x))
        assert rep.sup_error <= 1e-2

    def test_self_comparison_is_exact(self):
        chain = discretize(STICKY, -6.0, 6.0, 501)
        sol = solve_chain_stopping(chain, 0.5)
        interp = lambda x: np.interp(np.asarray(x, dtype=float),
                                     chain.nodes, sol.values)
        rep = compare(chain, sol.values, interp)
        assert rep.sup_error == 0.0

    def test_jump_estimate_at_sticky_point(self):
        chain = discretize(STICKY, -6.0, 6.0, 4001)
        sol = solve_chain_stopping(chain, 0.25)
        rep = compare(chain, sol.values,
                      lambda x: value_function(0.25, 1.0, x), jump_at=0.0)
        assert abs(rep.jump_estimate - (math.sqrt(0.5) - 1.0)) <= 0.05

    def test_stopping_boundary_detection(self):
        chain = discretize(STICKY, -6.0, 6.0, 4001)
        sol = solve_chain_stopping(chain, 0.25)
        rep = compare(chain, sol.values, lambda x: value_function(0.25, 1.0, x))
        step = chain.nodes[1] - chain.nodes[0]
        assert abs(rep.stopping_boundary - 0.0) <= step + 1e-12

    def test_positive_threshold_boundary_with_adequate_window(self):
        # the left truncation must sit deep enough that its bias does not
        # leak into the boundary detection band
        chain = discretize(STICKY, -14.0, 6.0, 6001)
        sol = solve_chain_stopping(chain, 0.1)
        rep = compare(chain, sol.values, lambda x: value_function(0.1, 1.0, x))
        step = chain.nodes[1] - chain.nodes[0]
        xs = solve_threshold(0.1, 1.0)
        assert abs(rep.stopping_boundary - xs) <= step + 1e-12

    def test_low_discount_accuracy_with_adequate_window(self):
        chain = discretize(STICKY, -14.0, 6.0, 6001)
        sol = solve_chain_stopping(chain, 0.1)
        rep = compare(chain, sol.values, lambda x: value_function(0.1, 1.0, x))
        # criterion band of the [-6, 6] window, here far from truncation
        band = (chain.nodes >= -4.8) & (chain.nodes <= 4.8)
        err = np.abs(sol.values - value_function(0.1, 1.0, chain.nodes))[band]
        assert err.max() <= 1e-2

    def test_jump_estimate_matches_derivative_theory_at_low_discount(self):
        # with a positive threshold the value kinks at the sticky point by
        # the speed-atom term alone: left - right = -2 c alpha V(0)
        chain = discretize(STICKY, -14.0, 6.0, 6001)
        sol = solve_chain_stopping(chain, 0.1)
        rep = compare(chain, sol.values,
                      lambda x: value_function(0.1, 1.0, x), jump_at=0.0)
        expected = -2.0 * 0.1 * float(value_function(0.1, 1.0, 0.0))
        assert abs(rep.jump_estimate - expected) <= 0.05

    def test_refinement_convergence(self):
        prev = None
        for n in (501, 1001, 2001, 4001):
            chain = discretize(STICKY, -6.0, 6.0, n)
            sol = solve_chain_stopping(chain, 0.5)
            rep = compare(chain, sol.values, lambda x: value_function(0.5, 1.0, x))
            if prev is not None:
                assert rep.inner_sup_error <= 1.1 * prev
            prev = rep.inner_sup_error

    def test_removing_atom_recovers_classical_bm(self):
        # drop the sticky atom from the chain only; the classical threshold
        # solves (1+x) sqrt(2 alpha) = 1
        alpha = 0.5
        spec = STICKY
        plain = discretize(spec, -6.0, 6.0, 2001)
        mass = plain.node_mass.copy()
        i0 = plain.node_index(0.0)
        mass[i0] -= 2.0             # remove the atom weight
        import dataclasses
        scale = np.asarray(spec.scale(plain.nodes), dtype=float)
        up = 1.0 / (mass[1:-1] * (scale[2:] - scale[1:-1]))
        down = 1.0 / (mass[1:-1] * (scale[1:-1] - scale[:-2]))
        nochain = dataclasses.replace(plain, node_mass=mass, up_rate=up,
                                      down_rate=down)
        sol = solve_chain_stopping(nochain, alpha)
        k = math.sqrt(2 * alpha)
        xs = 1.0 / k - 1.0
        def classical(x):
            x = np.asarray(x, dtype=float)
            return np.where(x <= xs, (1 + xs) * np.exp(k * (x - xs)),
                            np.maximum(1 + x, 0.0))
        rep = compare(nochain, sol.values, classical)
        assert rep.inner_sup_error <= 1e-2
