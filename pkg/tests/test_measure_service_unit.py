import math

import numpy as np
import pytest
from scipy.stats import wasserstein_distance

from app.data_models import CompactObservable, EmpiricalMeasure, ObservableDictionary
from app.services import fixture_service
from app.services.measure_service import (
    barycenter_field,
    dirac_field,
    dirac_gap,
    empirical_measure,
    ergodic_means,
    merge_atoms,
    moments,
    pairing,
    parametrized_distance,
    parametrized_measure,
    parametrized_weak_star_distance,
    slice_directions,
    sliced_wasserstein,
    wasserstein,
    wasserstein_1d,
    weak_star_distance,
    weighted_ergodic_mean,
)
from app.utils.error_handlers import GridMismatchError

HALF_AND_HALF = EmpiricalMeasure(points=[[0.0], [1.0]], weights=[0.5, 0.5])


def random_measure(rng, size: int, D: int = 1) -> EmpiricalMeasure:
    weights = rng.uniform(0.1, 1.0, size)
    return EmpiricalMeasure(points=rng.normal(size=(size, D)), weights=weights / weights.sum())


class TestErgodicMeans:
    """Unit tests for weighted ergodic averages"""

    def test_alternating_cesaro_mean(self, alternating_seq, unit_tent, cesaro):
        """Test the Cesaro mean of b(U_n) is 1/2 for even N"""
        mean = weighted_ergodic_mean(alternating_seq, unit_tent, cesaro, 512)
        assert mean.shape == (1, 4)
        assert np.all(mean == 0.5)

    def test_means_stay_in_unit_interval(self, block_seq, shipped_weights, unit_tent):
        """Test weighted means of [0, 1]-valued observables stay in [0, 1]"""
        for w in shipped_weights:
            mean = weighted_ergodic_mean(block_seq, unit_tent, w, 300)
            assert np.all((mean >= 0.0) & (mean <= 1.0))

    def test_ergodic_means_match_single_checkpoint(self, block_seq, unit_tent, shipped_weights):
        """Test the batched means agree with one-off evaluations"""
        w = shipped_weights[3]
        batched = ergodic_means(block_seq, unit_tent, w, [64, 200])
        assert np.allclose(batched[1], weighted_ergodic_mean(block_seq, unit_tent, w, 200))

    def test_level_beyond_sequence_rejected(self, alternating_seq, unit_tent, cesaro):
        """Test N larger than the sequence fails"""
        with pytest.raises(ValueError, match="exceeds"):
            weighted_ergodic_mean(alternating_seq, unit_tent, cesaro, 513)


class TestEmpiricalMeasures:
    """Unit tests for per-cell empirical measures"""

    def test_atoms_and_weights(self, alternating_seq, cesaro):
        """Test odd N puts one more atom of mass at 1"""
        mu = empirical_measure(alternating_seq, 0, cesaro, 11)
        assert mu.points[:, 0].tolist() == [0.0, 1.0]
        assert mu.weights == pytest.approx([5 / 11, 6 / 11])
        assert mu.total_mass == pytest.approx(1.0)

    def test_cell_tuple_and_flat_index_agree(self, alternating_seq, cesaro):
        """Test a (t, x) tuple addresses the same cell as its flat index"""
        a = empirical_measure(alternating_seq, (0, 3), cesaro, 9)
        b = empirical_measure(alternating_seq, 3, cesaro, 9)
        assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)

    def test_merge_atoms(self):
        """Test coincident points merge and zero weights drop"""
        mu = merge_atoms(np.array([0.0, 1.0, 0.0, 2.0]), np.array([0.2, 0.5, 0.3, 0.0]))
        assert mu.points[:, 0].tolist() == [0.0, 1.0]
        assert mu.weights.tolist() == pytest.approx([0.5, 0.5])

    def test_merge_atoms_beyond_sort_neighbours(self):
        """Test close atoms merge even when another atom sorts between them"""
        points = np.array([[0.0, 1.0], [1e-12, 0.0], [2e-12, 1.0]])
        mu = merge_atoms(points, np.array([0.25, 0.5, 0.25]), tol=1e-9)
        assert mu.points.tolist() == [[0.0, 1.0], [1e-12, 0.0]]
        assert mu.weights.tolist() == pytest.approx([0.5, 0.5])

    @pytest.mark.parametrize("N", [10, 100, 1000])
    def test_oscillating_sequence_measure(self, grid, cesaro, N):
        """Test each cell's measure is within 1/(2N) of 1/2 delta_0 + 1/2 delta_1"""
        seq = fixture_service.alternating(grid, 1000)
        for cell in range(grid.n_cells):
            assert wasserstein(empirical_measure(seq, cell, cesaro, N), HALF_AND_HALF) <= 1.0 / (2 * N)

    def test_odd_level_attains_counting_bound(self, alternating_seq, cesaro):
        """Test the 1/(2N) bound is attained for odd N"""
        mu = empirical_measure(alternating_seq, 0, cesaro, 11)
        assert wasserstein(mu, HALF_AND_HALF) == pytest.approx(1.0 / 22.0)

    def test_parametrized_measure_has_one_measure_per_cell(self, alternating_seq, cesaro):
        """Test the parametrized measure covers every space-time cell"""
        P = parametrized_measure(alternating_seq, cesaro, 64)
        assert len(P.measures) == 4
        assert P.D == 1
        assert np.all(barycenter_field(P) == 0.5)


class TestWasserstein:
    """Unit tests for Wasserstein distances"""

    def test_matches_scipy_oracle(self, rng):
        """Test the exact 1D distance against scipy on random weighted atoms"""
        for _ in range(100):
            mu = random_measure(rng, int(rng.integers(1, 12)))
            nu = random_measure(rng, int(rng.integers(1, 12)))
            expected = wasserstein_distance(mu.points[:, 0], nu.points[:, 0], mu.weights, nu.weights)
            assert wasserstein_1d(mu, nu) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("K", [1, 3, 16])
    def test_sliced_equals_exact_in_one_dimension(self, rng, K):
        """Test slicing in 1D reproduces the quantile distance for any direction count"""
        directions = slice_directions(1, K)
        for _ in range(100):
            mu = random_measure(rng, int(rng.integers(1, 12)))
            nu = random_measure(rng, int(rng.integers(1, 12)))
            assert abs(sliced_wasserstein(mu, nu, 1.0, directions) - wasserstein_1d(mu, nu)) <= 1e-12

    @pytest.mark.parametrize("D", [1, 2])
    @pytest.mark.parametrize("s", [1.0, 2.0])
    def test_metric_axioms_on_random_triples(self, rng, D, s):
        """Test symmetry and the triangle inequality on random weighted atoms"""
        directions = slice_directions(D, 8)
        for _ in range(100):
            mu, nu, eta = (random_measure(rng, int(rng.integers(1, 10)), D) for _ in range(3))
            forward = wasserstein(mu, nu, s, directions)
            assert wasserstein(nu, mu, s, directions) == pytest.approx(forward, abs=1e-12)
            assert wasserstein(mu, eta, s, directions) <= forward + wasserstein(nu, eta, s, directions) + 1e-12

    def test_order_two_between_diracs(self):
        """Test W_s between two Diracs is the distance of their points"""
        assert wasserstein(EmpiricalMeasure.dirac(0.0), EmpiricalMeasure.dirac(3.0), s=2.0) == pytest.approx(3.0)

    def test_identical_measures_have_zero_distance(self, rng):
        """Test W_s(mu, mu) = 0"""
        mu = random_measure(rng, 7)
        assert wasserstein(mu, mu, s=1.5) == 0.0

    def test_order_below_one_rejected(self):
        """Test s < 1 is rejected"""
        with pytest.raises(ValueError, match="s must be >= 1"):
            wasserstein(HALF_AND_HALF, HALF_AND_HALF, s=0.5)

    def test_dimension_mismatch_rejected(self):
        """Test measures in different state dimensions cannot be compared"""
        with pytest.raises(ValueError, match="R\\^1 and R\\^2"):
            wasserstein(HALF_AND_HALF, EmpiricalMeasure.dirac([0.0, 0.0]))

    def test_slice_directions_are_unit_vectors(self):
        """Test every shipped direction set has unit rows"""
        for D in (2, 3, 5):
            directions = slice_directions(D, 8)
            assert directions.shape == (8, D)
            assert np.allclose(np.linalg.norm(directions, axis=1), 1.0)
        assert np.all(slice_directions(1, 4) == 1.0)

    def test_sliced_distance_in_two_dimensions(self):
        """Test slicing along the displacement recovers the distance"""
        mu = EmpiricalMeasure.dirac([0.0, 0.0])
        nu = EmpiricalMeasure.dirac([1.0, 0.0])
        assert sliced_wasserstein(mu, nu, 1.0, np.array([[1.0, 0.0]])) == pytest.approx(1.0)
        assert wasserstein(mu, nu, 1.0, slice_directions(2, 2)) == pytest.approx(0.5)


class TestMomentsAndWeakStar:
    """Unit tests for moments and the weak-star distance"""

    def test_moments_of_half_and_half(self):
        """Test barycenter, variance and deviation of 1/2 delta_0 + 1/2 delta_1"""
        summary = moments(HALF_AND_HALF, s=2.0)
        assert summary.barycenter == pytest.approx([0.5])
        assert summary.second_moment == pytest.approx([0.5])
        assert summary.variance == pytest.approx([0.25])
        assert summary.deviation == pytest.approx([0.5])
        assert summary.absolute_moment == pytest.approx(0.5)

    def test_pairing(self, unit_tent):
        """Test <mu, b> sums atom weights times b"""
        assert pairing(HALF_AND_HALF, unit_tent) == pytest.approx(0.5)

    def test_weak_star_distance(self, unit_tent):
        """Test the weak-star series with a single observable"""
        dictionary = ObservableDictionary(observables=(unit_tent,), lower=(0.0,), upper=(2.0,))
        gap = weak_star_distance(HALF_AND_HALF, EmpiricalMeasure.dirac(1.0), dictionary)
        assert gap == pytest.approx(0.5 * 0.5 / 1.5)
        assert weak_star_distance(HALF_AND_HALF, HALF_AND_HALF, dictionary) == 0.0


class TestParametrizedMeasures:
    """Unit tests for distances between parametrized measures"""

    def test_grid_mismatch_rejected(self, alternating_seq, cesaro):
        """Test measures on different grids cannot be compared"""
        other = fixture_service.alternating(fixture_service.fixture_grid(cells=8), 64)
        with pytest.raises(GridMismatchError):
            parametrized_distance(parametrized_measure(alternating_seq, cesaro, 64), parametrized_measure(other, cesaro, 64))

    def test_dirac_gap_of_oscillating_limit(self, alternating_seq, cesaro):
        """Test the alternating limit is at distance 1/2 |Q| from its barycentric Dirac field"""
        P = parametrized_measure(alternating_seq, cesaro, 512)
        assert dirac_gap(P) == pytest.approx(0.5)

    def test_dirac_field_has_no_gap(self, grid):
        """Test a Dirac field is its own barycentric Dirac field"""
        P = dirac_field(grid, np.linspace(0.0, 1.0, 4).reshape(grid.shape))
        assert dirac_gap(P) == 0.0

    def test_weak_star_field_distance(self, alternating_seq, cesaro, unit_tent):
        """Test the integrated weak-star distance vanishes between equal levels"""
        dictionary = ObservableDictionary(observables=(unit_tent,), lower=(0.0,), upper=(2.0,))
        P = parametrized_measure(alternating_seq, cesaro, 64)
        Q = parametrized_measure(alternating_seq, cesaro, 128)
        assert parametrized_weak_star_distance(P, Q, dictionary) == pytest.approx(0.0, abs=1e-15)

    def test_dirac_collapse_harmonic_bound(self, grid, cesaro):
        """Test U_n = U + 1/n is within H_N / N |Q| of the Dirac field at U"""
        N = 1000
        seq = fixture_service.strongly_convergent(grid, N)
        P = parametrized_measure(seq, cesaro, N)
        limit = dirac_field(grid, fixture_service.limit_of_strongly_convergent(grid))
        harmonic = math.fsum(1.0 / n for n in range(1, N + 1)) / N
        distance = parametrized_distance(P, limit, s=1.0)
        assert distance <= harmonic * grid.measure + 1e-12
        assert distance == pytest.approx(harmonic * grid.measure, rel=1e-9)
