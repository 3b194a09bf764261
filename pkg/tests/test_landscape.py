import numpy as np
import pytest

from annealdiag.errors import ResourceLimitError
from annealdiag.landscape import (
    analyze,
    basin_assignment,
    basin_weights,
    enumerate_energies,
    local_minima,
    write_gap_histogram,
)
from annealdiag.model import IsingInstance, energy, make_instance
from annealdiag.qsim import all_config_energies


def two_spin_instance():
    return IsingInstance(
        n=2,
        edges=((0, 1, -1.0),),
        fields=(0.0, 0.0),
        subsystem=(0,),
        boundary_scale=1.0,
        meta={"family": "custom"},
    )


class TestEnumeration:
    def test_two_spin_table(self):
        table = enumerate_energies(two_spin_instance())
        assert list(table) == [-1.0, 1.0, 1.0, -1.0]

    def test_matches_direct_energy_calls(self):
        inst = make_instance(10, 4, 0.5, 1.0, 0.5, seed=3)
        table = enumerate_energies(inst)
        rng = np.random.default_rng(0)
        for z in rng.integers(0, 1 << 10, size=100):
            config = 1 - 2 * ((int(z) >> np.arange(10)) & 1)
            assert table[z] == pytest.approx(energy(inst, config), abs=1e-9)

    def test_gray_code_equals_vectorized_full(self):
        # full cross-check of the incremental walk against re-evaluation
        for seed in range(5):
            inst = make_instance(10, 4, 0.5, 1.0, 0.5, seed=seed)
            assert np.allclose(enumerate_energies(inst), all_config_energies(inst), atol=1e-9)

    def test_cap(self):
        inst = make_instance(22, 4, 0.5, 0.0, 0.0, seed=0)
        with pytest.raises(ResourceLimitError):
            enumerate_energies(inst)


class TestLocalMinima:
    def test_k4_ferromagnet_has_two(self):
        inst = make_instance(4, 2, 1.0, 0.0, 0.0, seed=0)
        mins, energies, ties = local_minima(enumerate_energies(inst))
        assert set(mins) == {0, 15}
        assert ties == 0

    def test_strong_field_single_minimum(self):
        base = make_instance(8, 4, 1.0, 0.0, 0.0, seed=0)
        inst = IsingInstance(
            n=8,
            edges=base.edges,
            fields=(-10.0,) * 8,
            subsystem=base.subsystem,
            boundary_scale=1.0,
            meta={},
        )
        mins, _, _ = local_minima(enumerate_energies(inst))
        assert list(mins) == [0]  # all-up aligns against h = -10

    def test_global_minimum_is_local_minimum(self):
        inst = make_instance(12, 4, 0.5, 1.0, 0.5, seed=5)
        table = enumerate_energies(inst)
        mins, energies, _ = local_minima(table)
        assert energies[0] == pytest.approx(table.min())

    def test_gap_flip_invariance_without_fields(self):
        inst = make_instance(10, 4, 0.5, 0.0, 0.5, seed=2)
        rep = analyze(inst)
        flipped = analyze(inst)  # deterministic repeat
        assert rep.gap == flipped.gap
        table = enumerate_energies(inst)
        mins, energies, _ = local_minima(table)
        # global flip maps minima onto minima when all h = 0
        full = (1 << 10) - 1
        assert set(mins) == {m ^ full for m in mins}


class TestBasins:
    def test_weights_sum_to_one(self):
        inst = make_instance(10, 4, 0.5, 1.0, 0.5, seed=7)
        w = basin_weights(enumerate_energies(inst), beta=2.0)
        assert sum(w.values()) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_ferromagnet_half_half(self):
        inst = make_instance(4, 2, 1.0, 0.0, 0.0, seed=0)
        table = enumerate_energies(inst)
        for beta in (0.3, 1.0, 5.0):
            w = basin_weights(table, beta, seeds=[0, 15])
            assert w[0] == pytest.approx(0.5)
            assert w[15] == pytest.approx(0.5)

    def test_beta_zero_weights_are_basin_sizes(self):
        inst = make_instance(8, 4, 0.5, 1.0, 0.5, seed=1)
        table = enumerate_energies(inst)
        roots = basin_assignment(table)
        w = basin_weights(table, 0.0)
        for root, weight in w.items():
            assert weight == pytest.approx((roots == root).sum() / len(table))

    def test_large_beta_unique_ground(self):
        base = make_instance(8, 4, 1.0, 0.0, 0.0, seed=0)
        inst = IsingInstance(
            n=8, edges=base.edges, fields=(-0.3,) * 8,
            subsystem=base.subsystem, boundary_scale=1.0, meta={},
        )
        table = enumerate_energies(inst)
        w = basin_weights(table, beta=200.0)
        root = int(np.argmin(table))
        assert w[root] == pytest.approx(1.0, abs=1e-12)

    def test_descent_reaches_local_minima_only(self):
        inst = make_instance(10, 4, 0.5, 1.0, 0.5, seed=9)
        table = enumerate_energies(inst)
        roots = set(np.unique(basin_assignment(table)))
        mins, _, _ = local_minima(table)
        assert roots == set(mins)


class TestReport:
    def test_report_fields_and_json(self, tmp_path):
        inst = make_instance(10, 4, 0.5, 1.0, 0.5, seed=3)
        rep = analyze(inst, beta=1.0)
        assert rep.n_local_minima >= 1
        assert rep.gap >= 0
        d = rep.to_dict()
        assert d["global_minimum"]["energy"] <= d["second_lowest_local_minimum"]["energy"]
        rep.save(tmp_path / "report.json")
        assert (tmp_path / "report.json").exists()

    def test_gap_histogram_csv(self, tmp_path):
        path = tmp_path / "gaps.csv"
        write_gap_histogram([0.5, 1.0, 1.5, 2.5], path, n_bins=4)
        lines = path.read_text().splitlines()
        assert lines[0] == "bin_left,bin_right,count"
        counts = [int(row.split(",")[2]) for row in lines[1:]]
        assert sum(counts) == 4
