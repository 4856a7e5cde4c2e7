from itertools import combinations
from unittest import mock

from django.test import SimpleTestCase
import numpy as np
from scipy.optimize import linprog

from cellfree.exceptions import ParameterError
from cellfree.lpsolver import LinearProgram, LpStatus, Relation, solve


def program(objective, rows, lower=None, upper=None):
    lp = LinearProgram(objective=objective, lower_bounds=lower, upper_bounds=upper)
    for coefficients, relation, bound in rows:
        lp.add_constraint(coefficients, relation, bound)
    return lp


def best_vertex(c, A, b, upper):
    """Minimum of c^T x over every basic feasible point of A x <= b, 0 <= x <= upper."""
    n = c.size
    G = np.vstack([A, np.eye(n), -np.eye(n)])
    h = np.concatenate([b, upper, np.zeros(n)])
    active = np.array(list(combinations(range(G.shape[0]), n)))
    systems, rhs = G[active], h[active]
    regular = np.abs(np.linalg.det(systems)) > 1e-10
    points = np.linalg.solve(systems[regular], rhs[regular][..., None])[..., 0]
    feasible = np.all(points @ G.T <= h + 1e-9 * np.maximum(1.0, np.abs(h)), axis=1)
    return float(np.min(points[feasible] @ c))


class SimplexTests(SimpleTestCase):

    def test_two_variable_maximum(self):
        lp = program([-1.0, -1.0], [([1.0, 2.0], '<=', 4.0), ([3.0, 1.0], '<=', 6.0)])
        solution = solve(lp)
        self.assertTrue(solution.is_optimal)
        np.testing.assert_allclose(solution.x, [1.6, 1.2], atol=1e-9)
        self.assertAlmostEqual(solution.objective_value, -2.8)

    def test_equality_and_lower_rows(self):
        lp = program([1.0, 1.0], [([1.0, 1.0], Relation.GE, 2.0), ([1.0, -1.0], Relation.EQ, 0.0)])
        solution = solve(lp)
        np.testing.assert_allclose(solution.x, [1.0, 1.0], atol=1e-9)

    def test_negative_right_hand_side(self):
        solution = solve(program([1.0], [([-1.0], '<=', -1.0)]))
        self.assertAlmostEqual(solution.x[0], 1.0)

    def test_bounds(self):
        solution = solve(program([-1.0], [], lower=[1.0], upper=[3.0]))
        self.assertAlmostEqual(solution.x[0], 3.0)
        solution = solve(program([1.0], [], lower=[-2.0]))
        self.assertAlmostEqual(solution.x[0], -2.0)

    def test_infeasible(self):
        solution = solve(program([1.0], [([1.0], '<=', 1.0), ([1.0], '>=', 2.0)]))
        self.assertEqual(solution.status, LpStatus.INFEASIBLE)
        self.assertIsNone(solution.x)

    def test_unbounded(self):
        solution = solve(program([-1.0, 0.0], [([0.0, 1.0], '<=', 1.0)]))
        self.assertEqual(solution.status, LpStatus.UNBOUNDED)

    def test_failed_recheck_is_not_infeasibility(self):
        lp = program([-1.0, -1.0], [([1.0, 2.0], '<=', 4.0), ([3.0, 1.0], '<=', 6.0)])
        with mock.patch.object(LinearProgram, 'violations', return_value=['row0: <= violated by 1.000e-03']):
            with self.assertLogs('cellfree.lpsolver', level='WARNING'):
                solution = solve(lp)
        self.assertEqual(solution.status, LpStatus.NUMERICAL)
        self.assertIsNone(solution.x)

    def test_infeasible_is_quiet(self):
        with self.assertNoLogs('cellfree.lpsolver', level='WARNING'):
            solution = solve(program([1.0], [([1.0], '<=', 1.0), ([1.0], '>=', 2.0)]))
        self.assertEqual(solution.status, LpStatus.INFEASIBLE)

    def test_empty_rows(self):
        self.assertEqual(solve(program([1.0], [([0.0], '<=', -1.0)])).status, LpStatus.INFEASIBLE)
        self.assertTrue(solve(program([1.0], [([0.0], '<=', 1.0)])).is_optimal)

    def test_redundant_equalities(self):
        lp = program([1.0, 0.0], [([1.0, 1.0], '==', 1.0), ([2.0, 2.0], '==', 2.0)])
        solution = solve(lp)
        np.testing.assert_allclose(solution.x, [0.0, 1.0], atol=1e-9)

    def test_degenerate_cycling_example(self):
        # classic instance on which Dantzig's rule cycles without an anti-cycling fallback
        lp = program(
            [-0.75, 150.0, -0.02, 6.0],
            [
                ([0.25, -60.0, -0.04, 9.0], '<=', 0.0),
                ([0.5, -90.0, -0.02, 3.0], '<=', 0.0),
                ([0.0, 0.0, 1.0, 0.0], '<=', 1.0),
            ],
        )
        solution = solve(lp)
        self.assertTrue(solution.is_optimal)
        self.assertAlmostEqual(solution.objective_value, -0.05)

    def test_matches_vertex_enumeration(self):
        rng = np.random.default_rng(12)
        for trial in range(50):
            m, n = rng.integers(2, 9), rng.integers(2, 7)
            A = rng.uniform(-1.0, 2.0, size=(m, n))
            x0 = rng.uniform(0.0, 5.0, size=n)
            b = A @ x0 + rng.uniform(0.0, 1.0, size=m)
            c = rng.uniform(-1.0, 1.0, size=n)
            lp = program(c, [(row, '<=', bound) for row, bound in zip(A, b)], upper=np.full(n, 10.0))
            solution = solve(lp)
            expected = best_vertex(c, A, b, np.full(n, 10.0))
            with self.subTest(trial=trial):
                self.assertTrue(solution.is_optimal)
                self.assertAlmostEqual(solution.objective_value, expected, delta=1e-6 * max(1.0, abs(expected)))
                self.assertEqual(lp.violations(solution.x), [])

    def test_mixed_relations_against_reference(self):
        rng = np.random.default_rng(3)
        n = 5
        A = rng.uniform(0.1, 1.0, size=(6, n))
        x0 = rng.uniform(0.5, 2.0, size=n)
        b = A @ x0
        c = rng.uniform(0.1, 1.0, size=n)
        rows = [(A[i], '>=', b[i] - 0.5) for i in range(3)] + [(A[i], '<=', b[i] + 0.5) for i in range(3, 6)]
        solution = solve(program(c, rows))
        reference = linprog(
            c,
            A_ub=np.vstack([-A[:3], A[3:]]),
            b_ub=np.concatenate([-(b[:3] - 0.5), b[3:] + 0.5]),
            method='highs',
        )
        self.assertAlmostEqual(solution.objective_value, reference.fun, places=7)


class LinearProgramTests(SimpleTestCase):

    def test_violations_report_rows_and_bounds(self):
        lp = LinearProgram(objective=[1.0, 1.0], upper_bounds=[1.0, np.inf], names=['a', 'b'])
        lp.add_constraint([1.0, 1.0], '>=', 3.0, name='total')
        problems = lp.violations([2.0, 0.0])
        self.assertEqual(len(problems), 2)
        self.assertTrue(problems[0].startswith('total'))
        self.assertTrue(problems[1].startswith('a: above upper bound'))

    def test_dump_lists_every_row(self):
        lp = LinearProgram(objective=[1.0, 0.5], names=['p', 'q'])
        lp.add_constraint([1.0, 1.0], '<=', 2.0, name='cap')
        text = lp.dumps()
        self.assertIn('variables p q', text)
        self.assertIn('cap 1.0 1.0 <= 2.0', text)
        self.assertIn('bound q 0.0 inf', text)

    def test_malformed_programs(self):
        with self.assertRaises(ParameterError):
            LinearProgram(objective=[1.0], lower_bounds=[2.0], upper_bounds=[1.0])
        with self.assertRaises(ParameterError):
            LinearProgram(objective=[1.0], lower_bounds=[-np.inf])
        lp = LinearProgram(objective=[1.0, 1.0])
        with self.assertRaises(ParameterError):
            lp.add_constraint([1.0], '<=', 1.0)
        with self.assertRaises(ParameterError):
            lp.add_constraint([1.0, np.nan], '<=', 1.0)
