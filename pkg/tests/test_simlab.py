"""Data generation, scaling, pipeline plumbing, batches, surfaces, configs."""

import dataclasses

import numpy as np
import pytest

from nnpoly import nn, poly as pm, simlab


class TestGenerateData:
    def test_shapes_and_defaults(self):
        X, y, gen = simlab.generate_data(simlab.DataGenConfig(seed=1))
        assert X.shape == (200, 3) and y.shape == (200,)
        assert gen.p == 3 and gen.degree == 2
        assert len(gen.canonical()) <= 10  # C(5,2) coefficient slots

    def test_coefficients_within_range(self):
        _, _, gen = simlab.generate_data(simlab.DataGenConfig(seed=2))
        for c in gen.canonical().values():
            assert -5.0 <= c <= 5.0

    def test_zero_noise_lies_on_polynomial(self):
        cfg = simlab.DataGenConfig(n=120, p=2, noise_sd=0.0, seed=3)
        X, y, gen = simlab.generate_data(cfg)
        np.testing.assert_allclose(y, gen.evaluate_many(X), rtol=0, atol=1e-12)
        fit, _ = pm.ols_fit(X, y, 2)
        for m in pm.monomials_up_to(2, 2):
            assert fit.coefficient(m) == pytest.approx(gen.coefficient(m), abs=1e-8)

    def test_seed_determinism(self):
        a = simlab.generate_data(simlab.DataGenConfig(seed=9))
        b = simlab.generate_data(simlab.DataGenConfig(seed=9))
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        assert a[2] == b[2]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            simlab.DataGenConfig(n=1)
        with pytest.raises(ValueError):
            simlab.DataGenConfig(feature_variance=0.0)
        with pytest.raises(ValueError):
            simlab.DataGenConfig(noise_sd=-0.1)


class TestSplit:
    def test_sizes(self):
        X = np.arange(400.0).reshape(200, 2)
        y = np.arange(200.0)
        (Xtr, ytr), (Xte, yte) = simlab.split(X, y, 0.75, seed=0)
        assert Xtr.shape == (150, 2) and Xte.shape == (50, 2)
        assert ytr.shape == (150,) and yte.shape == (50,)

    def test_disjoint_and_complete(self):
        X = np.arange(100.0).reshape(50, 2)
        y = np.arange(50.0)
        (Xtr, ytr), (Xte, yte) = simlab.split(X, y, 0.6, seed=4)
        together = np.sort(np.concatenate([ytr, yte]))
        assert np.array_equal(together, y)
        assert set(map(tuple, Xtr)).isdisjoint(set(map(tuple, Xte)))

    def test_seed_determinism(self):
        X = np.random.default_rng(0).normal(size=(30, 2))
        y = np.arange(30.0)
        one = simlab.split(X, y, 0.5, seed=7)
        two = simlab.split(X, y, 0.5, seed=7)
        assert np.array_equal(one[0][1], two[0][1])

    def test_fraction_validated(self):
        with pytest.raises(ValueError, match="fraction"):
            simlab.split(np.zeros((4, 1)), np.zeros(4), 1.0, seed=0)


class TestScaling:
    def test_unit_maps_train_extrema(self):
        rng = np.random.default_rng(5)
        X = rng.normal(3.0, 2.0, (40, 3))
        y = rng.normal(0.0, 5.0, 40)
        spec = simlab.fit_scaling(X, y, "unit")
        Xs, ys = spec.apply_x(X), spec.apply_y(y)
        np.testing.assert_allclose(Xs.min(axis=0), 0.0, atol=1e-15)
        np.testing.assert_allclose(Xs.max(axis=0), 1.0, atol=1e-15)
        assert ys.min() == pytest.approx(0.0, abs=1e-15)
        assert ys.max() == pytest.approx(1.0, abs=1e-15)

    def test_symmetric_maps_train_extrema(self):
        rng = np.random.default_rng(6)
        X = rng.normal(-7.0, 1.0, (40, 2))
        y = rng.normal(10.0, 2.0, 40)
        spec = simlab.fit_scaling(X, y, "symmetric")
        Xs, ys = spec.apply_x(X), spec.apply_y(y)
        np.testing.assert_allclose(Xs.min(axis=0), -1.0, atol=1e-14)
        np.testing.assert_allclose(Xs.max(axis=0), 1.0, atol=1e-14)
        assert ys.min() == pytest.approx(-1.0, abs=1e-14)

    @pytest.mark.parametrize("mode", simlab.SCALING_MODES)
    def test_invert_after_apply_is_identity(self, mode):
        rng = np.random.default_rng(7)
        X = rng.normal(2.0, 3.0, (30, 2))
        y = rng.normal(-1.0, 6.0, 30)
        spec = simlab.fit_scaling(X, y, mode)
        np.testing.assert_allclose(spec.invert_x(spec.apply_x(X)), X, atol=1e-12)
        np.testing.assert_allclose(spec.invert_y(spec.apply_y(y)), y, atol=1e-12)

    def test_depends_only_on_train_rows(self):
        rng = np.random.default_rng(8)
        X, y = rng.normal(size=(40, 2)), rng.normal(size=40)
        (Xtr, ytr), (Xte, yte) = simlab.split(X, y, 0.5, seed=1)
        before = simlab.fit_scaling(Xtr, ytr, "symmetric")
        Xte[:] = 1e9  # mutating the held-out rows must not matter
        after = simlab.fit_scaling(Xtr, ytr, "symmetric")
        assert np.array_equal(before.x_min, after.x_min)
        assert np.array_equal(before.x_max, after.x_max)
        assert before.y_min == after.y_min and before.y_max == after.y_max

    def test_constant_column_rejected(self):
        X = np.ones((10, 2))
        X[:, 0] = np.arange(10)
        with pytest.raises(ValueError, match="feature 1 is constant"):
            simlab.fit_scaling(X, np.arange(10.0), "unit")

    def test_scaling_file_round_trip(self, tmp_path):
        rng = np.random.default_rng(9)
        spec = simlab.fit_scaling(rng.normal(size=(20, 3)), rng.normal(size=20), "unit")
        path = tmp_path / "scaling.json"
        simlab.save_scaling(spec, path)
        back = simlab.load_scaling(path)
        assert back.mode == "unit"
        assert np.array_equal(back.x_min, spec.x_min)
        assert np.array_equal(back.x_max, spec.x_max)
        assert (back.y_min, back.y_max) == (spec.y_min, spec.y_max)


class TestRunExperiment:
    def test_record_complete_and_consistent(self):
        run = simlab.run_pipeline(simlab.ExperimentConfig(seed=5))
        rec = run.record
        assert rec.activation == "softplus" and rec.scaling == "symmetric"
        assert rec.h1 == 4 and rec.q == 3 and rec.seed == 5
        assert rec.mse_nn_pr >= 0.0 and rec.mse_nn_y >= 0.0
        assert 0.0 <= rec.coverage <= 1.0
        assert rec.epochs >= 1 and rec.wall_time > 0.0

    def test_metric_matches_independent_routine(self):
        run = simlab.run_pipeline(simlab.ExperimentConfig(seed=6))
        # recompute both prediction vectors and the metric from scratch
        Xs = run.scaling_spec.apply_x(run.X_test)
        a = nn.predict(run.weights, Xs)
        b = run.transcoded.poly.evaluate_many(Xs)
        independent = sum((float(u) - float(v)) ** 2 for u, v in zip(a, b)) / len(a)
        assert run.record.mse_nn_pr == pytest.approx(independent, rel=1e-12)
        assert run.record.mse_nn_y == pytest.approx(
            float(np.mean((a - run.scaling_spec.apply_y(run.y_test)) ** 2)), rel=1e-12
        )

    def test_reproducible(self):
        a = simlab.run_experiment(simlab.ExperimentConfig(seed=7))
        b = simlab.run_experiment(simlab.ExperimentConfig(seed=7))
        assert dataclasses.replace(a, wall_time=0.0) == dataclasses.replace(b, wall_time=0.0)

    def test_fixed_data_pins_dataset_and_split(self):
        data = simlab.DataGenConfig(p=2, seed=77)
        r1 = simlab.run_pipeline(simlab.ExperimentConfig(data=data, h1=2, q=2, seed=1, data_seed=77))
        r2 = simlab.run_pipeline(simlab.ExperimentConfig(data=data, h1=2, q=2, seed=2, data_seed=77))
        assert np.array_equal(r1.X_train, r2.X_train)
        assert np.array_equal(r1.y_test, r2.y_test)
        assert not np.array_equal(r1.weights.w, r2.weights.w)


class TestRunBatch:
    def test_single_repetition_equals_run_experiment(self):
        data = simlab.DataGenConfig(n=60)
        grid = simlab.BatchGrid(activations=("softplus",), scalings=("unit",), h1_values=(2,), q_values=(2,))
        train = nn.TrainConfig(max_epochs=300)
        batch = simlab.run_batch(data, grid, reps=1, base_seed=42, train=train)
        assert len(batch.records) == 1
        single = simlab.run_experiment(
            simlab.ExperimentConfig(
                data=data, activation="softplus", scaling="unit", h1=2, q=2, seed=42, train=train
            )
        )
        got, want = batch.records[0], dataclasses.replace(single, rep=0)
        assert dataclasses.replace(got, wall_time=0.0) == dataclasses.replace(want, wall_time=0.0)

    def test_identical_tables_for_same_base_seed(self):
        data = simlab.DataGenConfig(n=60)
        grid = simlab.BatchGrid(activations=("softplus", "tanh"), scalings=("unit",), h1_values=(2,), q_values=(2, 3))
        train = nn.TrainConfig(max_epochs=300)
        one = simlab.run_batch(data, grid, reps=2, base_seed=9, train=train)
        two = simlab.run_batch(data, grid, reps=2, base_seed=9, train=train)
        assert simlab.records_to_csv(one.records) == simlab.records_to_csv(two.records)
        assert simlab.summary_to_csv(one.records) == simlab.summary_to_csv(two.records)

    def test_records_sorted_and_fully_crossed(self):
        data = simlab.DataGenConfig(n=60)
        grid = simlab.BatchGrid(activations=("tanh", "softplus"), scalings=("unit",), h1_values=(2,), q_values=(3, 2))
        batch = simlab.run_batch(data, grid, reps=2, base_seed=1, train=nn.TrainConfig(max_epochs=200))
        keys = [(r.activation, r.scaling, r.h1, r.q, r.rep) for r in batch.records]
        assert keys == sorted(keys)
        assert len(batch.records) == 2 * 2 * 2  # act x q x rep

    def test_shared_training_across_orders(self):
        # one trained network per repetition serves every q: identical seed,
        # coverage differing only through q, identical weight statistics
        data = simlab.DataGenConfig(n=60)
        grid = simlab.BatchGrid(activations=("softplus",), scalings=("unit",), h1_values=(2,), q_values=(2, 5))
        batch = simlab.run_batch(data, grid, reps=1, base_seed=3, train=nn.TrainConfig(max_epochs=200))
        r2, r5 = batch.records
        assert (r2.q, r5.q) == (2, 5)
        assert r2.seed == r5.seed
        assert r2.w_mean_abs == r5.w_mean_abs and r2.epochs == r5.epochs

    @pytest.mark.filterwarnings("ignore:overflow")
    def test_failures_recorded_and_batch_continues(self):
        # absurd feature magnitudes overflow the loss immediately when unscaled
        data = simlab.DataGenConfig(n=20, p=1, mean_lo=1e200, mean_hi=2e200, seed=0)
        grid = simlab.BatchGrid(activations=("linear",), scalings=("none",), h1_values=(1,), q_values=(1,))
        batch = simlab.run_batch(data, grid, reps=2, base_seed=0, train=nn.TrainConfig(max_epochs=50))
        assert len(batch.failures) == 2
        assert len(batch.records) == 0
        assert "non-finite" in batch.failures[0].message

    def test_reps_validated(self):
        with pytest.raises(ValueError, match="repetitions"):
            simlab.run_batch(simlab.DataGenConfig(), simlab.BatchGrid(), reps=0, base_seed=0)


class TestCsvTables:
    def _records(self):
        mk = lambda act, q, rep, m: simlab.ExperimentRecord(
            activation=act, scaling="unit", h1=4, q=q, rep=rep, seed=rep,
            mse_nn_pr=m, mse_nn_y=0.1, nn_pred_var=1.0, coverage=0.5,
            w_mean_abs=0.2, w_max_abs=0.9, v_max_abs=1.1, epochs=10,
            converged=True, wall_time=123.456,
        )
        return [mk("softplus", 3, r, float(r + 1)) for r in range(5)]

    def test_records_csv_shape_and_no_wall_time(self):
        text = simlab.records_to_csv(self._records())
        lines = text.strip().split("\n")
        assert lines[0] == ",".join(simlab.RECORD_COLUMNS)
        assert len(lines) == 6
        assert "wall" not in lines[0]
        assert "123.456" not in text

    def test_summary_quantiles(self):
        text = simlab.summary_to_csv(self._records())
        lines = text.strip().split("\n")
        assert lines[0] == ",".join(simlab.SUMMARY_COLUMNS)
        cells = lines[1].split(",")
        assert cells[:5] == ["softplus", "unit", "4", "3", "5"]
        q10, q50, q90 = (float(v) for v in cells[5:8])
        want10, want50, want90 = np.quantile([1.0, 2.0, 3.0, 4.0, 5.0], [0.1, 0.5, 0.9])
        assert (q10, q50, q90) == (pytest.approx(want10), pytest.approx(want50), pytest.approx(want90))


class TestSurfaces:
    def test_constant_polynomial_grid(self):
        poly = pm.Polynomial(p=2, degree=0, coeffs={(0, 0): 3.25})
        grid = simlab.surface_grid(poly, (0.0, 1.0, -1.0, 1.0), 5)
        assert grid.shape == (25, 3)
        assert np.all(grid[:, 2] == 3.25)
        assert grid[0, 0] == 0.0 and grid[-1, 0] == 1.0

    def test_row_major_ordering(self):
        poly = pm.Polynomial(p=2, degree=1, coeffs={(1, 0): 1.0})
        grid = simlab.surface_grid(poly, (0.0, 1.0, 0.0, 1.0), 3)
        # x2 varies fastest within each x1 block
        np.testing.assert_allclose(grid[:3, 0], 0.0)
        np.testing.assert_allclose(grid[:3, 1], [0.0, 0.5, 1.0])

    def test_requires_two_variables(self):
        poly = pm.Polynomial(p=3, degree=1, coeffs={})
        with pytest.raises(ValueError, match="2-variable"):
            simlab.surface_grid(poly, (0, 1, 0, 1), 4)

    def test_expand_box_about_center(self):
        assert simlab.expand_box((0.0, 2.0, -1.0, 1.0), 3.0) == (-2.0, 4.0, -3.0, 3.0)

    def test_least_squares_tracks_generator_on_both_boxes(self):
        # 3x extrapolation amplifies coefficient noise, so the sample count
        # matters; measured deviation at this seed is 0.36 of the 1.0 budget
        cfg = simlab.DataGenConfig(n=400, p=2, noise_sd=0.1, seed=0)
        X, y, gen = simlab.generate_data(cfg)
        fit, _ = pm.ols_fit(X, y, 2)
        box = simlab.data_box(X)
        for bounds in (box, simlab.expand_box(box, 3.0)):
            a = simlab.surface_grid(gen, bounds, 25)[:, 2]
            b = simlab.surface_grid(fit, bounds, 25)[:, 2]
            assert np.max(np.abs(a - b)) <= 10 * cfg.noise_sd

    def test_grid_csv(self):
        poly = pm.Polynomial(p=2, degree=0, coeffs={(0, 0): 1.0})
        text = simlab.grid_to_csv(simlab.surface_grid(poly, (0, 1, 0, 1), 2))
        lines = text.strip().split("\n")
        assert lines[0] == "x1,x2,z"
        assert len(lines) == 5


class TestTomlConfigs:
    SIM = """
[data]
n = 60
p = 2
degree = 2
mean_range = [-4.0, 4.0]
noise_sd = 0.05

[grid]
activations = ["softplus"]
scalings = ["unit", "symmetric"]
h1 = [2]
q = [2, 3]

[train]
max_epochs = 500

[experiment]
train_fraction = 0.8
"""

    def test_simulate_config_parses(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text(self.SIM)
        cfg = simlab.load_simulate_config(path)
        assert cfg.data.n == 60 and cfg.data.p == 2 and cfg.data.noise_sd == 0.05
        assert cfg.data.mean_lo == -4.0 and cfg.data.mean_hi == 4.0
        assert cfg.grid.scalings == ("unit", "symmetric") and cfg.grid.q_values == (2, 3)
        assert cfg.train.max_epochs == 500
        assert cfg.train_fraction == 0.8

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("[data]\nsamples = 10\n")
        with pytest.raises(ValueError, match="unknown key 'samples'"):
            simlab.load_simulate_config(path)

    def test_invalid_toml_rejected(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("[data\nn = 10\n")
        with pytest.raises(ValueError, match="invalid TOML"):
            simlab.load_simulate_config(path)

    def test_surface_config_requires_p2(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("[data]\np = 3\n\n[surfaces]\nseeds = [1]\n")
        with pytest.raises(ValueError, match="p=2"):
            simlab.load_surface_config(path)

    def test_surface_config_parses(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("[data]\np = 2\nseed = 4\n\n[surfaces]\nseeds = [1, 2]\nresolution = 8\n")
        cfg = simlab.load_surface_config(path)
        assert cfg.seeds == (1, 2) and cfg.resolution == 8 and cfg.data.seed == 4
