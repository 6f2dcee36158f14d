"""Smoke tests for the prefcore extension module."""

import csv
import math
import os
import sys
import tempfile

import prefcore as pc


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol


def test_project_simplex():
    assert pc.project_simplex([0.6, 0.6]) == [0.5, 0.5]
    p = pc.project_simplex([1.5, -0.2])
    assert approx(p[0], 1.0) and approx(p[1], 0.0)


def test_forward_quad_knapsack():
    inst = pc.make_instance(
        1, pc.UtilityForm.quad([1.0, 1.0]), pc.Domain.cont_knapsack([1.0, 1.0], 0.4)
    )
    sol = pc.solve_forward([0.5, 0.5], inst)
    assert sol.optimal()
    assert approx(sol.x[0], 0.2, 1e-8) and approx(sol.x[1], 0.2, 1e-8)

    grid = pc.brute_force_forward([0.5, 0.5], inst, 1e-3)
    assert abs(sol.objective - grid.objective) <= 1e-4 * (1 + abs(grid.objective))


def test_projected_gradient_sequence():
    # 1-d interval instance: iterates 3, 2, 3/2, 7/6, 11/12, then constant
    cfg = pc.GenConfig()
    cfg.domain = pc.DomainKind.INTERVAL
    cfg.T = 6
    stream = pc.gen_instance_stream(cfg, 0)
    inst = stream.steps[0]
    y = pc.solve_forward_box([0.0], -3.0, 3.0, inst).x

    theta = [3.0]
    expected = [2.0, 1.5, 7.0 / 6.0, 11.0 / 12.0, 11.0 / 12.0]
    for t, want in enumerate(expected, start=1):
        x_pred = pc.solve_forward_box(theta, -3.0, 3.0, inst).x
        rec = pc.eval_losses(theta, inst, y, [0.0])
        theta = pc.md_euclid_box_step(theta, rec.s, 1.0 / t, -3.0, 3.0)
        assert approx(theta[0], want), (t, theta, want)
    assert x_pred == [-1.0] or x_pred == [0.0]


def test_loss_identity():
    cfg = pc.GenConfig()
    cfg.n = 4
    cfg.T = 3
    cfg.seed = 7
    stream = pc.gen_instance_stream(cfg, 0)
    inst = stream.steps[0]
    y = pc.solve_forward(stream.theta_true, inst).x
    rec = pc.eval_losses([0.25, 0.25, 0.25, 0.25], inst, y, stream.theta_true)
    assert abs(rec.l_sim - (rec.l_sub + rec.l_est)) <= 1e-7
    at_true = pc.eval_losses(stream.theta_true, inst, y, stream.theta_true)
    assert abs(at_true.l_sim) <= 1e-9


def test_implicit_steps():
    out = pc.implicit_sim_step([0.5, 0.5], [1.0, -1.0], 0.1)
    assert approx(out[0], 0.4) and approx(out[1], 0.6)

    cfg = pc.GenConfig()
    cfg.n = 2
    cfg.T = 1
    cfg.seed = 3
    stream = pc.gen_instance_stream(cfg, 0)
    inst = stream.steps[0]
    y = pc.solve_forward(stream.theta_true, inst).x
    theta_next, objective, patterns = pc.implicit_pre_step([0.5, 0.5], 0.1, inst, y)
    assert len(theta_next) == 2 and objective >= 0.0 and patterns >= 1
    assert approx(sum(theta_next), 1.0, 1e-9)


def test_run_experiment_to_dir():
    cfg = pc.ExperimentConfig()
    cfg.gen.n = 4
    cfg.gen.T = 10
    cfg.gen.instance_count = 2
    cfg.gen.seed = 11
    cfg.algo = pc.Algorithm.MD_ENTROPY
    with tempfile.TemporaryDirectory() as tmp:
        ok = pc.run_experiment_to_dir(cfg, tmp)
        assert ok
        with open(os.path.join(tmp, "records.csv"), newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:6] == ["instance", "t", "loss_pre", "loss_sub", "loss_est", "loss_sim"]
        assert len(rows) == 1 + 2 * 10
        # perfect information: nonnegative losses
        for row in rows[1:]:
            assert float(row[2]) >= -1e-8 and float(row[3]) >= -1e-8


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok: {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
