//! End-to-end acceptance checks against the reference bound table and the
//! published tuning targets. Each test prints a single PASS/FAIL line.

use nalgebra::{DMatrix, DVector};
use newton_bounds::approx::{audit, FormulaId};
use newton_bounds::bvp::{Shooter, StepQuery};
use newton_bounds::critical::{delta_y2, delta_y2_numeric, focal_time, NominalParam};
use newton_bounds::damping::{integrate_sigma, optimal_step};
use newton_bounds::hamiltonian::{
    hamiltonian_rhs, hamiltonian_value, integrate_flow, PhasePoint,
};
use newton_bounds::interp::Pchip;
use newton_bounds::pathfollow::barrier::{svec, BarrierOracle, LogDetFull};
use newton_bounds::pathfollow::{
    classical_bound, make_problem, run, tune, ClassicalVariant, ProblemKind, ProblemSize, Setup,
    TunePolicy,
};
use newton_bounds::{classify_regime, Error, Regime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reference bound table: (decrement, full-step bound if certified,
/// optimal-step bound, optimal damping coefficient).
const TABLE: &[(f64, Option<f64>, f64, f64)] = &[
    (0.02, Some(0.0004002129), 0.0004002020, 0.9999959049),
    (0.04, Some(0.0016030061), 0.0016027905, 0.9999672844),
    (0.05, Some(0.0025070365), 0.0025064667, 0.9999357402),
    (0.06, Some(0.0036140910), 0.0036128237, 0.9998883080),
    (0.08, Some(0.0064421367), 0.0064376124, 0.9997320984),
    (0.10, Some(0.0100985841), 0.0100863025, 0.9994703910),
    (0.12, Some(0.0145975978), 0.0145695698, 0.9990735080),
    (0.14, Some(0.0199560957), 0.0198993569, 0.9985103062),
    (0.15, Some(0.0229637111), 0.0228857123, 0.9981561975),
    (0.16, Some(0.0261938350), 0.0260886230, 0.9977481582),
    (0.18, Some(0.0333335449), 0.0331510886, 0.9967529721),
    (0.20, Some(0.0414011017), 0.0411009637, 0.9954892620),
    (0.22, Some(0.0504257486), 0.0499526517, 0.9939202785),
    (0.24, Some(0.0604403592), 0.0597204227, 0.9920082112),
    (0.25, Some(0.0658302428), 0.0649521741, 0.9909114838),
    (0.26, Some(0.0714817517), 0.0704180523, 0.9897144751),
    (0.28, Some(0.0835910576), 0.0820584243, 0.9870000911),
    (0.30, Some(0.0968141551), 0.0946530992, 0.9838261704),
    (0.32, Some(0.1112021742), 0.1082118504, 0.9801545078),
    (0.34, Some(0.1268120901), 0.1227421781, 0.9759482831),
    (0.35, Some(0.1350948306), 0.1303732829, 0.9736337787),
    (0.36, Some(0.1437074168), 0.1382488115, 0.9711728663),
    (0.38, Some(0.1619590244), 0.1547332145, 0.9657967079),
    (0.40, Some(0.1816461018), 0.1721931153, 0.9597922905),
    (0.42, Some(0.2028572983), 0.1906220829, 0.9531371033),
    (0.44, Some(0.2256920826), 0.2100091752, 0.9458145937),
    (0.45, Some(0.2377527563), 0.2200572997, 0.9418997667),
    (0.46, Some(0.2502623689), 0.2303386829, 0.9378150396),
    (0.48, Some(0.2766944756), 0.2515899946, 0.9291362838),
    (0.50, Some(0.3051314992), 0.2737375986, 0.9197842716),
    (0.52, Some(0.3357362119), 0.2967512350, 0.9097733400),
    (0.54, Some(0.3686946267), 0.3205961990, 0.8991262221),
    (0.55, Some(0.3861220234), 0.3328184758, 0.8935734256),
    (0.56, Some(0.4042204205), 0.3452337887, 0.8878737471),
    (0.58, Some(0.4425604721), 0.3706218774, 0.8760542409),
    (0.60, Some(0.4840018685), 0.3967155859, 0.8637126540),
    (0.62, Some(0.5288808639), 0.4234680202, 0.8508994659),
    (0.64, Some(0.5775944788), 0.4508310379, 0.8376694301),
    (0.65, Some(0.6035336028), 0.4647263175, 0.8309160437),
    (0.66, Some(0.6306157177), 0.4787560083, 0.8240802319),
    (0.68, Some(0.6885138337), 0.5071945318, 0.8101911337),
    (0.70, Some(0.7519817648), 0.5360990922, 0.7960616771),
    (0.72, Some(0.8218739745), 0.5654236219, 0.7817504964),
    (0.74, Some(0.8992597480), 0.5951239679, 0.7673142876),
    (0.75, Some(0.9411738550), 0.6101018892, 0.7600662717),
    (0.76, Some(0.9855000696), 0.6251582547, 0.7528069572),
    (0.78, Some(1.0823615911), 0.6554871449, 0.7382789623),
    (0.80, Some(1.1921910478), 0.6860740057, 0.7237768386),
    (0.82, Some(1.3181923462), 0.7168849922, 0.7093429029),
    (0.84, Some(1.4648868491), 0.7478890580, 0.6950151115),
    (0.85, Some(1.5479540249), 0.7634545483, 0.6879016840),
    (0.86, Some(1.6389206049), 0.7790579083, 0.6808270495),
    (0.88, Some(1.8505789254), 0.8103659079, 0.6668080264),
    (0.90, Some(2.1168852322), 0.8417899549, 0.6529832527),
    (0.92, Some(2.4687193058), 0.8733093323, 0.6393740764),
    (0.94, Some(2.9700851395), 0.9049055446, 0.6259982580),
    (0.95, Some(3.3195687439), 0.9207272500, 0.6194025003),
    (0.96, None, 0.9365621489, 0.6128702685),
    (0.98, None, 0.9682645833, 0.6000015959),
];

fn report(criterion: &str, ok: bool, detail: &str) {
    println!(
        "{}: {criterion} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{criterion}: {detail}");
}

#[test]
fn criterion_1_optimal_step_columns() {
    let mut max_bound = 0.0f64;
    let mut max_gamma = 0.0f64;
    for &(a, _, bound_ref, gamma_ref) in TABLE {
        let r = optimal_step(a).unwrap();
        max_bound = max_bound.max((r.lambda_out - bound_ref).abs());
        max_gamma = max_gamma.max((r.gamma_star - gamma_ref).abs());
    }
    report(
        "criterion 1 (optimal-step columns, 59 rows)",
        max_bound <= 1e-6 && max_gamma <= 1e-6,
        &format!("max |bound err| {max_bound:.2e}, max |gamma err| {max_gamma:.2e}"),
    );
}

#[test]
fn criterion_2_full_step_column() {
    let grid: Vec<f64> = TABLE.iter().map(|r| r.0).collect();
    let results = Shooter::default().sweep_full_step(&grid);
    let mut max_err = 0.0f64;
    let mut blanks_ok = true;
    for (&(a, reference, _, _), res) in TABLE.iter().zip(&results) {
        match (reference, res) {
            (Some(v), Ok(r)) => max_err = max_err.max((r.lambda_out - v).abs()),
            (None, Err(Error::BeyondCertifiedRange { .. })) => {}
            other => {
                blanks_ok = false;
                eprintln!("row {a}: unexpected outcome {other:?}");
            }
        }
    }
    report(
        "criterion 2 (full-step column with blanks at 0.96/0.98)",
        max_err <= 1e-5 && blanks_ok,
        &format!("max |bound err| {max_err:.2e}, blank pattern reproduced: {blanks_ok}"),
    );
}

#[test]
fn criterion_3_tuner_targets() {
    let full = tune(TunePolicy::FullStep).unwrap();
    let opt = tune(TunePolicy::OptimalDamping).unwrap();
    let ok = (full.lambda_star - 0.394257).abs() <= 1e-3
        && (full.gap - 0.2184159486).abs() <= 1e-4
        && (opt.lambda_star - 0.442946).abs() <= 1e-3
        && (opt.gap - 0.2300010331).abs() <= 1e-4
        && (opt.gamma_at_star - 0.944679).abs() <= 1e-3;
    report(
        "criterion 3 (tuner targets)",
        ok,
        &format!(
            "full: lambda* {:.6} gap {:.10}; optimal: lambda* {:.6} gap {:.10} gamma {:.6}",
            full.lambda_star, full.gap, opt.lambda_star, opt.gap, opt.gamma_at_star
        ),
    );
}

#[test]
fn criterion_4_classical_baselines() {
    let full = tune(TunePolicy::ClassicalFull).unwrap();
    let damped = tune(TunePolicy::ClassicalDamped).unwrap();
    // Spot-check the formulas themselves at the maximizers.
    let f_ok = (classical_bound(full.lambda_star, ClassicalVariant::Full).unwrap()
        - full.lambda_low)
        .abs()
        <= 1e-12;
    let d_ok = (classical_bound(damped.lambda_star, ClassicalVariant::Damped).unwrap()
        - damped.lambda_low)
        .abs()
        <= 1e-12;
    let ok = (full.lambda_star - 0.2291).abs() <= 1e-3
        && (full.gap - 0.1408).abs() <= 1e-3
        && (damped.lambda_star - 0.2910).abs() <= 1e-3
        && (damped.gap - 0.1638).abs() <= 1e-3
        && f_ok
        && d_ok;
    report(
        "criterion 4 (classical baselines)",
        ok,
        &format!(
            "full: lambda* {:.4} gap {:.4}; damped: lambda* {:.4} gap {:.4}",
            full.lambda_star, full.gap, damped.lambda_star, damped.gap
        ),
    );
}

#[test]
fn criterion_5_approximation_audits() {
    let full = audit(FormulaId::FullStepBound, 0.005).unwrap();
    let bound = audit(FormulaId::OptStepBound, 0.005).unwrap();
    let gamma = audit(FormulaId::OptGamma, 0.005).unwrap();
    let ok = full.max_abs_error <= 0.013
        && bound.max_abs_error <= 0.007
        && gamma.max_abs_error <= 0.008;
    report(
        "criterion 5 (approximation audits, grid step 0.005)",
        ok,
        &format!(
            "max errors: full-step {:.4} (≤0.013), opt bound {:.4} (≤0.007), opt gamma {:.4} (≤0.008)",
            full.max_abs_error, bound.max_abs_error, gamma.max_abs_error
        ),
    );
}

#[test]
fn criterion_6_focal_point_and_linearization() {
    let t_star = 1.0 - 2f64.powf(2.0 / 3.0);
    let t = focal_time(NominalParam(-1.0)).unwrap();
    let focal_err = (t - t_star).abs();

    let mut max_err = 0.0f64;
    for &c in &[-3.0, -1.5, -1.0, -0.5, 0.5, 2.0] {
        for i in 1..=9 {
            let t = -0.1 * f64::from(i);
            // Closed form leaves its domain once the nominal trajectory
            // degenerates; the comparison applies where both are defined.
            let Ok(closed) = delta_y2(t, NominalParam(c)) else {
                continue;
            };
            let numeric = delta_y2_numeric(t, NominalParam(c)).unwrap();
            max_err = max_err.max((closed - numeric).abs());
        }
    }
    report(
        "criterion 6 (focal point and linearized flow)",
        focal_err <= 1e-10 && max_err <= 1e-8,
        &format!("focal-point err {focal_err:.2e}, closed-vs-numeric max err {max_err:.2e}"),
    );
}

#[test]
fn criterion_7_invariant_suite() {
    // H = 0 is invariant under the flow: start on the endpoint circle with
    // p = y/||y|| at t = 0 and integrate backward.
    let mut h_drift = 0.0f64;
    for &y1 in &[-0.9f64, -0.5, -0.2] {
        let y2 = (-y1 - y1 * y1).sqrt();
        let n = (y1 * y1 + y2 * y2).sqrt();
        let start = PhasePoint::new(0.0, [y1, y2], [y1 / n, y2 / n]);
        assert!(hamiltonian_value(&start).unwrap().abs() < 1e-13);
        for p in integrate_flow(&start, -0.5, 1e-11).unwrap() {
            h_drift = h_drift.max(hamiltonian_value(&p).unwrap().abs());
        }
    }

    // Gradient of H against central differences at random phase points.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut grad_err = 0.0f64;
    let mut checked = 0usize;
    while checked < 1000 {
        let p = PhasePoint::new(
            rng.gen_range(-0.8..0.0),
            [rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)],
            [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
        );
        let Ok(rhs) = hamiltonian_rhs(&p) else {
            continue;
        };
        // rhs = (H_p1, H_p2, -H_y1, -H_y2)
        let analytic = [-rhs[2], -rhs[3], rhs[0], rhs[1]];
        let h = 1e-6;
        let mut ok_point = true;
        let mut fd = [0.0f64; 4];
        for (k, slot) in fd.iter_mut().enumerate() {
            let mut lo = p;
            let mut hi = p;
            match k {
                0 => {
                    lo.y1 -= h;
                    hi.y1 += h;
                }
                1 => {
                    lo.y2 -= h;
                    hi.y2 += h;
                }
                2 => {
                    lo.p1 -= h;
                    hi.p1 += h;
                }
                _ => {
                    lo.p2 -= h;
                    hi.p2 += h;
                }
            }
            match (hamiltonian_value(&hi), hamiltonian_value(&lo)) {
                (Ok(a), Ok(b)) => *slot = (a - b) / (2.0 * h),
                _ => ok_point = false,
            }
        }
        if !ok_point || p.radicand() < 1e-3 {
            continue;
        }
        let scale = analytic.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for k in 0..4 {
            grad_err = grad_err.max((analytic[k] - fd[k]).abs() / scale);
        }
        checked += 1;
    }

    // Endpoint-circle residual of the planar integration.
    let mut circle_res = 0.0f64;
    for &a in &[0.1, 0.4, 0.7, 0.9] {
        let s = integrate_sigma(a, 1e-11).unwrap();
        let (y1, y2) = (s.y_star.y1, s.y_star.y2);
        circle_res = circle_res.max((y1 * y1 + y1 + y2 * y2).abs());
    }

    // Cross-consistency: the shooting pipeline at gamma*(a) must agree with
    // the planar-reduction bound.
    let shooter = Shooter::default();
    let mut cross_err = 0.0f64;
    for &a in &[0.1, 0.3, 0.5, 0.7] {
        let opt = optimal_step(a).unwrap();
        let q = StepQuery::new(a, opt.gamma_star).unwrap();
        let bvp = shooter.solve(&q).unwrap();
        cross_err = cross_err.max((bvp.lambda_out - opt.lambda_out).abs());
    }

    // Brute-force gamma scan around the reported optimum.
    let mut scan_err = 0.0f64;
    for &a in &[0.3, 0.5] {
        let gammas: Vec<f64> = (0..=150).map(|i| 1.0 - 1e-3 * f64::from(i)).collect();
        let res = shooter.sweep_gamma(a, &gammas);
        let (argmin, _) = gammas
            .iter()
            .zip(&res)
            .map(|(&g, r)| (g, r.as_ref().unwrap().lambda_out))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        scan_err = scan_err.max((argmin - optimal_step(a).unwrap().gamma_star).abs());
    }

    let ok = h_drift <= 1e-8
        && grad_err <= 1e-6
        && circle_res <= 1e-10
        && cross_err <= 1e-5
        && scan_err <= 2e-3;
    report(
        "criterion 7 (invariant suite)",
        ok,
        &format!(
            "H drift {h_drift:.2e}, grad rel err {grad_err:.2e}, circle residual {circle_res:.2e}, \
             cross-consistency {cross_err:.2e}, gamma-scan dev {scan_err:.2e}"
        ),
    );
}

/// Interpolated lower-bound surface lambda_low(rho, gamma) over a fixed
/// gamma grid, with exact closed forms in the one-dimensional regime.
struct BoundSurface {
    gammas: Vec<f64>,
    curves: Vec<Pchip>,
    a_lo: f64,
    a_hi: f64,
}

impl BoundSurface {
    fn build() -> Self {
        let gammas: Vec<f64> = (1..=25).map(|j| f64::from(j) * 0.04).collect();
        let a_grid: Vec<f64> = (1..=47).map(|i| f64::from(i) * 0.02).collect();
        let shooter = Shooter::default();
        let mut table = vec![vec![0.0; a_grid.len()]; gammas.len()];
        for (i, &a) in a_grid.iter().enumerate() {
            let descending: Vec<f64> = gammas.iter().rev().copied().collect();
            for (k, r) in shooter.sweep_gamma(a, &descending).iter().enumerate() {
                table[gammas.len() - 1 - k][i] = r.as_ref().unwrap().lambda_out;
            }
        }
        let curves = table
            .into_iter()
            .map(|row| Pchip::new(a_grid.clone(), row).unwrap())
            .collect();
        Self {
            gammas,
            curves,
            a_lo: a_grid[0],
            a_hi: *a_grid.last().unwrap(),
        }
    }

    /// Interpolated bound at `(rho, gammas[j])`; exact in the 1D regime.
    fn eval(&self, rho: f64, j: usize) -> f64 {
        let gamma = self.gammas[j];
        if classify_regime(rho, gamma).unwrap() == Regime::OneDim {
            return StepQuery::new(rho, gamma).unwrap().one_dim_bound();
        }
        assert!(rho >= self.a_lo && rho <= self.a_hi);
        self.curves[j].eval(rho)
    }
}

#[test]
fn criterion_8_soundness_spot_test() {
    let surface = BoundSurface::build();
    let shooter = Shooter::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_slack = f64::INFINITY;
    let mut rechecked = 0usize;
    let trials = 10_000usize;

    let mut check = |rho: f64, j: usize, rho_after: f64| {
        let bound = surface.eval(rho, j);
        if rho_after > bound + 1e-6 {
            // Interpolation can undershoot; re-verify against the exact
            // pipeline before declaring a violation.
            rechecked += 1;
            let q = StepQuery::new(rho, surface.gammas[j]).unwrap();
            let exact = shooter.solve(&q).unwrap().lambda_out;
            assert!(
                rho_after <= exact + 1e-6,
                "soundness violated: rho {rho}, gamma {}, measured {rho_after}, bound {exact}",
                surface.gammas[j]
            );
            worst_slack = worst_slack.min(exact - rho_after);
        } else {
            worst_slack = worst_slack.min(bound - rho_after);
        }
    };

    for trial in 0..trials {
        let rho = rng.gen_range(0.021..0.935f64);
        let j = rng.gen_range(0..surface.gammas.len());
        let gamma = surface.gammas[j];
        if trial % 2 == 0 {
            // -sum log x_i on the positive orthant, diagonal closed forms.
            let n = rng.gen_range(1..=5);
            let x: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-1.0f64..1.0).exp2() * rng.gen_range(0.1..10.0))
                .collect();
            let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            u.iter_mut().for_each(|v| *v *= rho / norm);
            // gradient shift c makes the decrement at x exactly rho
            let mut rho_after_sq = 0.0;
            for i in 0..n {
                let d = u[i] / x[i];
                let x_new = x[i] * (1.0 - gamma * u[i]);
                assert!(x_new > 0.0);
                let g_new = -1.0 / x_new + d + 1.0 / x[i];
                rho_after_sq += (g_new * x_new).powi(2);
            }
            check(rho, j, rho_after_sq.sqrt());
        } else {
            // -log det X on symmetric positive definite matrices.
            let order = rng.gen_range(1..=5);
            let oracle = LogDetFull { order };
            let m = DMatrix::from_fn(order, order, |_, _| rng.gen_range(-1.0..1.0));
            let spd = &m * m.transpose()
                + DMatrix::identity(order, order) * rng.gen_range(0.05..2.0);
            let x = svec(&spd);
            let (_, grad, hess) = oracle.eval(&x).unwrap();
            let chol = hess.clone().cholesky().unwrap();
            let mut u = DVector::from_fn(oracle.dim(), |_, _| rng.gen_range(-1.0..1.0));
            let norm = u.norm();
            if norm < 1e-12 {
                continue;
            }
            u *= rho / norm;
            let d = chol.l() * &u;
            let x_new = &x - gamma * chol.solve(&d);
            assert!(oracle.domain_check(&x_new));
            let (_, grad_new, hess_new) = oracle.eval(&x_new).unwrap();
            let g = grad_new + &d - grad;
            let chol_new = hess_new.cholesky().unwrap();
            let rho_after = g.dot(&chol_new.solve(&g)).sqrt();
            check(rho, j, rho_after);
        }
    }
    report(
        "criterion 8 (soundness, 10000 trials)",
        true,
        &format!("no violation; min slack {worst_slack:.2e}, exact rechecks {rechecked}"),
    );
}

#[test]
fn criterion_9_path_following_band() {
    let problem = make_problem(
        ProblemKind::LogDetSdp,
        7,
        ProblemSize {
            primary: 18,
            secondary: 40,
        },
    )
    .unwrap();
    let oracle = problem.oracle.as_oracle();
    let mut iters = Vec::new();
    for setup in Setup::ALL {
        let config = setup.config(problem.tau0, problem.tau0 * 1e4);
        let log = run(oracle, &problem.c, &problem.x0, &config).unwrap();
        iters.push(log.len());
    }
    let [trad_full, tight_full, trad_damped, tight_opt] = iters[..] else {
        unreachable!()
    };
    let ratio = tight_opt as f64 / trad_full as f64;
    let ok = (0.40..=0.65).contains(&ratio)
        && trad_full >= trad_damped
        && trad_damped >= tight_full
        && tight_full >= tight_opt;
    report(
        "criterion 9 (path-following iteration band)",
        ok,
        &format!(
            "iterations: traditional-full {trad_full}, traditional-damped {trad_damped}, \
             tight-full {tight_full}, tight-optimal {tight_opt}; ratio {ratio:.3}"
        ),
    );
}
