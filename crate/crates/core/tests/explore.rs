use qotto_core::explore::{self, DeltaSweep, IonTrapSweep, Objective, TcPolicy};
use qotto_core::spectrum::DvrSettings;
use qotto_core::Mode;

#[test]
fn cell_x_sign_flip() {
    let sweep = IonTrapSweep {
        kappa_c_grid: vec![1.7],
        omega_ratio_grid: vec![1.0],
        xi_schedule: vec![1.0, 2.0, 4.0, 8.0],
        ..IonTrapSweep::default()
    };
    let (q, series) = sweep.evaluate(1.7, 1.0, &DvrSettings::default()).unwrap();
    assert!(q.work < 0.0);
    assert_eq!(q.mode, Some(Mode::Engine));
    let w = &series.work_per_xi2;
    assert!(w[1..].iter().all(|&v| v > 0.0));
}

#[test]
fn identical_traps_do_nothing() {
    let sweep = IonTrapSweep {
        kappa_c_grid: vec![1.0],
        omega_ratio_grid: vec![1.0],
        xi_schedule: vec![1.0, 2.0],
        ..IonTrapSweep::default()
    };
    let (c, q) = explore::sweep_fig3(&sweep, &DvrSettings::default()).unwrap();
    for t in [&c, &q] {
        let c = &t.cells[0];
        assert!(c.work.abs() <= 1e-9 * c.heat_hot.abs().max(c.heat_cold.abs()), "{c:?}");
        assert_eq!(t.cells[0].mode, Some(Mode::Broken));
    }
}

#[test]
fn optimizer_repairs_broken_and_refrigerator() {
    let s = DvrSettings::default();
    for r in [0.8, 4.0] {
        let (t_h, t_c) = TcPolicy::default().temperatures(12.0, r).unwrap();
        let o = explore::optimize_g(r, t_h, t_c, Objective::MaxEfficiency, (-5.0, 20.0), &s).unwrap();
        assert_eq!(o.result.mode, Mode::Engine);
    }
}

#[test]
fn delta_sweep_invariants() {
    let sweep = DeltaSweep {
        r_grid: vec![0.8, 1.0, 1.5, 2.0, 3.0, 3.4, 3.5, 4.0],
        g_grid: vec![-0.5, 0.0, 1.0, 10.0],
        ..DeltaSweep::default()
    };
    let (c, q) = explore::sweep_fig2(&sweep, &DvrSettings::default()).unwrap();
    let r_car = 12f64.sqrt();
    for (i, &r) in sweep.r_grid.iter().enumerate() {
        let expect = if r > 1.0 && r < r_car {
            Mode::Engine
        } else if r > r_car {
            Mode::Refrigerator
        } else {
            Mode::Broken
        };
        for j in 0..sweep.g_grid.len() {
            assert_eq!(c.cell(i, j).mode, Some(expect), "r = {r}");
            assert_eq!(c.cell(i, j), c.cell(i, 0));
            assert!(q.cell(i, j).audit_passed);
        }
        let (cc, qc) = (c.cell(i, 1), q.cell(i, 1));
        assert_eq!(cc.mode, qc.mode, "g = 0, r = {r}");
        if let (Some(a), Some(b)) = (cc.eta, qc.eta) {
            assert!((a - b).abs() <= 1e-9 * a, "r = {r}: {a} vs {b}");
        }
    }
    // r = 1, strong barrier: broken classically, engine quantum mechanically
    assert_eq!(q.cell(1, 3).mode, Some(Mode::Engine));
}

#[test]
fn optimizer_beats_homogeneous_baseline() {
    let s = DvrSettings::default();
    let (t_h, t_c) = TcPolicy::default().temperatures(12.0, 2.0).unwrap();
    let o = explore::optimize_g(2.0, t_h, t_c, Objective::MaxEfficiency, (-5.0, 20.0), &s).unwrap();
    assert!(o.objective_value >= 0.75 - 1e-9);
    assert!(o.w_floor > 0.0 && -o.result.work >= o.w_floor);
    assert!(o.result.eta_engine.unwrap() <= 1.0 - t_c / t_h);
}

#[test]
fn cooling_objective() {
    let s = DvrSettings::default();
    let (t_h, t_c) = TcPolicy::default().temperatures(12.0, 4.0).unwrap();
    let o = explore::optimize_g(4.0, t_h, t_c, Objective::MaxCooling, (0.0, 10.0), &s).unwrap();
    assert_eq!(o.result.mode, Mode::Refrigerator);
    assert!(o.objective_value > 0.0);
}
