//! Acceptance suite: one test per exit criterion, each printing a PASS line
//! with the measured values (run with `-- --nocapture` to see them).
//!
//! Tolerances and thresholds are pinned in the constants below.

use attractor_core::diagnostics::*;
use attractor_core::effdyn::*;
use attractor_core::numeric::{period_from_crossings, trapezoid};
use attractor_core::point3d::*;
use attractor_core::profiles::*;
use attractor_core::*;
use num_complex::Complex64;

const SQRT2: f64 = std::f64::consts::SQRT_2;
const PI: f64 = std::f64::consts::PI;
/// Kink internal mode frequency sqrt(3/2) and its period.
const MODE_FREQ: f64 = 1.224744871391589;
const MODE_PERIOD: f64 = 2.0 * PI / MODE_FREQ;

fn gl_model(half_width: f64, dx: f64) -> ModelSpec {
    ModelSpec::ginzburg_landau(Grid1D::symmetric(half_width, dx).unwrap()).unwrap()
}

fn n3_model(grid: Grid1D) -> ModelSpec {
    ModelSpec::relativistic_nlw(grid, 10.0, 6, 8.75, 5).unwrap()
}

/// Kink at `x0` with the internal mode excited at amplitude `amp`, boosted
/// to velocity `v`: the t = 0 slice of
///
/// ```text
///   psi = S(xi) + amp chi(xi) cos(Theta),   xi = gamma (x - v t - x0),
///   Theta = w2 gamma (t - v (x - x0)),      chi = 2 tanh(xi/sqrt2) sech(xi/sqrt2),
/// ```
///
/// first order in `amp`. The x-dependent phase of the mode is the
/// relativity-of-simultaneity tilt of the comoving oscillation.
fn wobbling_kink(grid: Grid1D, x0: f64, amp: f64, v: f64) -> FieldState {
    let gamma = 1.0 / (1.0 - v * v).sqrt();
    let shape = move |x: f64| {
        let a = gamma * (x - x0) / SQRT2;
        (a.tanh(), 1.0 / a.cosh())
    };
    let theta0 = move |x: f64| -MODE_FREQ * gamma * v * (x - x0);
    FieldState::from_real_fn(
        grid,
        move |x| {
            let (t, s) = shape(x);
            t + amp * 2.0 * t * s * theta0(x).cos()
        },
        move |x| {
            let (t, s) = shape(x);
            let ds = gamma / SQRT2; // d xi / dx scaled into the derivatives
            // S' and chi' with respect to x at t = 0
            let sp = ds * s * s;
            let chip = ds * 2.0 * s * (s * s - t * t);
            -v * (sp + amp * chip * theta0(x).cos())
                - amp * 2.0 * t * s * MODE_FREQ * gamma * theta0(x).sin()
        },
    )
}

#[test]
fn c01_kink_internal_mode_frequency_and_period() {
    let model = gl_model(40.0, 1e-2);
    let state = wobbling_kink(model.grid, 0.0, 0.05, 0.0);
    let params = StepParams::leapfrog(1e-3, Boundary::Sponge { width: 10.0 });
    let x_probe = 1.0;
    let rec = run(&model, &state, 200.0, &params, &[ObserverSpec::PointTrace {
        x0: x_probe,
        every: 0.02,
    }])
    .unwrap();
    let tr = &rec.traces[0];
    let baseline = (tr.x0 / SQRT2).tanh();
    let vals: Vec<f64> = tr.values.iter().map(|z| z.re - baseline).collect();
    let freq = internal_mode_frequency(&tr.times, &vals)
        .unwrap()
        .expect("mode peak present");
    let freq_err = (freq - MODE_FREQ).abs() / MODE_FREQ;
    assert!(freq_err <= 0.02, "mode frequency {freq} vs {MODE_FREQ}");
    // Independent period estimate from the crossings of the trace itself.
    let period = period_from_crossings(&tr.times, &vals).expect("oscillatory trace");
    let period_err = (period - MODE_PERIOD).abs() / MODE_PERIOD;
    assert!(period_err <= 0.02, "mode period {period} vs {MODE_PERIOD}");
    println!(
        "ACCEPTANCE c01 PASS — internal mode {freq:.4} (err {:.2}%), period {period:.3} (err {:.2}%)",
        100.0 * freq_err,
        100.0 * period_err
    );
}

#[test]
fn c02_lorentz_contraction_of_evolved_boosted_kinks() {
    let model = gl_model(30.0, 1e-2);
    let params = StepParams::leapfrog(2e-3, Boundary::FixedVacuum);
    let width_of = |v: f64| -> f64 {
        let state = kink_boost(model.grid, 0.0, v).unwrap();
        let evolved = evolve(&model, &state, 5.0, &params).unwrap();
        let kinks = detect_kinks(&evolved, 0.2);
        assert_eq!(kinks.len(), 1, "v={v}: expected one kink");
        kinks[0].width
    };
    let w0 = width_of(0.0);
    let mut msg = String::new();
    for v in [0.24, 0.5, 0.88] {
        let ratio = width_of(v) / w0;
        let expect = (1.0 - v * v).sqrt();
        let err = (ratio - expect).abs() / expect;
        assert!(err <= 0.02, "v={v}: width ratio {ratio} vs {expect}");
        msg.push_str(&format!("v={v}: {ratio:.4} vs {expect:.4} ({:.2}%); ", 100.0 * err));
    }
    println!("ACCEPTANCE c02 PASS — contraction {msg}");
}

#[test]
fn c03_einstein_time_delay_of_moving_kink_pulsations() {
    // Width of the travelling wobbling kink oscillates at the internal-mode
    // period dilated by gamma in the lab frame.
    let model = gl_model(45.0, 1e-2);
    let params = StepParams::leapfrog(2e-3, Boundary::Sponge { width: 8.0 });
    let mut msg = String::new();
    for v in [0.5, 0.88] {
        let gamma = 1.0 / (1.0f64 - v * v).sqrt();
        let mut state = wobbling_kink(model.grid, -25.0, 0.1, v);
        let mut widths = Vec::new();
        let chunk = 0.25;
        for k in 0..240 {
            state = evolve(&model, &state, chunk, &params).unwrap();
            let kinks = detect_kinks(&state, 0.2);
            assert_eq!(kinks.len(), 1, "v={v}: lost the kink");
            widths.push((chunk * (k + 1) as f64, kinks[0].width));
        }
        let times: Vec<f64> = widths.iter().map(|p| p.0).collect();
        let ws: Vec<f64> = widths.iter().map(|p| p.1).collect();
        let period = period_from_crossings(&times, &ws).expect("width oscillation");
        let expect = gamma * MODE_PERIOD;
        let err = (period - expect).abs() / expect;
        assert!(err <= 0.05, "v={v}: lab period {period} vs gamma T2 = {expect}");
        msg.push_str(&format!("v={v}: {period:.2} vs {expect:.2} ({:.2}%); ", 100.0 * err));
    }
    println!("ACCEPTANCE c03 PASS — time delay {msg}");
}

#[test]
fn c04_dispersion_law_of_radiated_packets() {
    // Run A: wobbling kink radiates its second harmonic; the packet front
    // obeys the group-velocity law.
    let model = gl_model(120.0, 1e-2);
    let params = StepParams::leapfrog(2.5e-3, Boundary::FixedVacuum);
    let state = wobbling_kink(model.grid, 0.0, 0.3, 0.0);
    let rec = run(&model, &state, 130.0, &params, &[
        ObserverSpec::Snapshots { every: 2.5 },
        ObserverSpec::PointTrace { x0: 30.0, every: 0.02 },
    ])
    .unwrap();
    let packets = packet_group_velocities(&rec, 1.0, 0.01, 15.0);
    let relation = |w: f64| (w * w - 2.0).sqrt() / w;
    let train = packets
        .iter()
        .find(|p| p.frequency.map_or(false, |f| (2.0..2.9).contains(&f)))
        .expect("second-harmonic packet detected");
    let f = train.frequency.unwrap();
    let rel_err = (train.speed - relation(f)).abs() / relation(f);
    let harm_err = (train.speed - 0.8165).abs() / 0.8165;
    assert!(rel_err <= 0.05, "train speed {} vs relation {}", train.speed, relation(f));
    assert!(harm_err <= 0.05, "train speed {} vs 0.8165", train.speed);

    // Run B: high-frequency packet on the vacuum approaches unit speed.
    let model_b = gl_model(80.0, 1e-2);
    let k0 = 10.0;
    let omega = (k0 * k0 + 2.0f64).sqrt();
    let (a, w, c) = (0.05, 5.0, -20.0);
    let packet = FieldState::from_real_fn(
        model_b.grid,
        move |x| 1.0 + a * (k0 * (x - c)).cos() * (-((x - c) / w).powi(2)).exp(),
        move |x| omega * a * (k0 * (x - c)).sin() * (-((x - c) / w).powi(2)).exp(),
    );
    let params_b = StepParams::leapfrog(2e-3, Boundary::FixedVacuum);
    let rec_b = run(&model_b, &packet, 60.0, &params_b, &[
        ObserverSpec::Snapshots { every: 2.0 },
        ObserverSpec::PointTrace { x0: 20.0, every: 0.01 },
    ])
    .unwrap();
    let packets_b = packet_group_velocities(&rec_b, 1.0, 0.01, 0.0);
    let fast = packets_b
        .iter()
        .filter(|p| p.frequency.is_some())
        .max_by(|x, y| x.speed.partial_cmp(&y.speed).unwrap())
        .expect("fast packet detected");
    let ff = fast.frequency.unwrap();
    let rel_err_b = (fast.speed - relation(ff)).abs() / relation(ff);
    assert!(rel_err_b <= 0.05, "fast packet {} vs relation {}", fast.speed, relation(ff));
    assert!(
        fast.speed >= 0.95 && fast.speed < 1.0,
        "fastest packet speed {}",
        fast.speed
    );
    println!(
        "ACCEPTANCE c04 PASS — 2nd-harmonic packet v={:.4} at w={:.3} (relation err {:.2}%, vs 0.8165 err {:.2}%); fast packet v={:.4} at w={:.3} (relation err {:.2}%)",
        train.speed, f, 100.0 * rel_err, 100.0 * harm_err, fast.speed, ff, 100.0 * rel_err_b
    );
}

#[test]
fn c05_linearized_kink_spectrum() {
    let grid = Grid1D::symmetric(20.0, 1e-2).unwrap();
    let v = gl_linearization_potential(grid);
    let eigs = schrodinger_spectrum(grid, &v, 2.0, 3).unwrap();
    assert!(eigs[0].abs() <= 1e-2, "ground state {}", eigs[0]);
    assert!((eigs[1] - 1.5).abs() <= 1e-2, "shape mode {}", eigs[1]);
    assert!(eigs[2] > 2.0, "continuum edge violated: {}", eigs[2]);
    println!(
        "ACCEPTANCE c05 PASS — spectrum {{{:.5}, {:.5}}}, next level {:.4} above the edge 2",
        eigs[0], eigs[1], eigs[2]
    );
}

#[test]
fn c06_dalembert_oracle_with_second_order_convergence() {
    // psi0 = (1 + tanh x)/2 (C- = 0, C+ = 1), pi0 = sech^2 x (integral 2):
    // long-time limits S+ = 1.5, S- = -0.5; after both characteristics pass,
    // the window |x| <= 5 holds exactly (S+, 0).
    let psi0 = |x: f64| 0.5 * (1.0 + x.tanh());
    let pi0 = |x: f64| {
        let c = x.cosh();
        1.0 / (c * c)
    };
    // Exact solution: psi = [psi0(x+t) + psi0(x-t)]/2 + [tanh(x+t) - tanh(x-t)]/2.
    let exact_psi = move |x: f64, t: f64| {
        0.5 * (psi0(x + t) + psi0(x - t)) + 0.5 * ((x + t).tanh() - (x - t).tanh())
    };
    let exact_pi = move |x: f64, t: f64| {
        let dpsi0 = |y: f64| {
            let c = y.cosh();
            0.5 / (c * c)
        };
        0.5 * (dpsi0(x + t) - dpsi0(x - t)) + 0.5 * (pi0(x + t) + pi0(x - t))
    };

    // Mid-flight second-order convergence against the closed form on |x| <= 5.
    let err_at = |dx: f64| -> f64 {
        let model = ModelSpec::dalembert(Grid1D::symmetric(35.0, dx).unwrap()).unwrap();
        let state = FieldState::from_real_fn(model.grid, psi0, pi0);
        let params = StepParams::leapfrog(0.1 * dx, Boundary::FixedVacuum);
        let t_mid = 4.0;
        let fin = evolve(&model, &state, t_mid, &params).unwrap();
        let exact = FieldState {
            time: fin.time,
            ..FieldState::from_real_fn(
                model.grid,
                |x| exact_psi(x, t_mid),
                |x| exact_pi(x, t_mid),
            )
        };
        local_seminorm(&fin, &exact, 5.0, SeminormVariant::KleinGordon).unwrap()
    };
    let coarse = err_at(0.02);
    let fine = err_at(0.01);
    let ratio = coarse / fine;
    assert!(
        (3.5..=4.5).contains(&ratio),
        "H1 error ratio {ratio} ({coarse} -> {fine})"
    );

    // Long-time limits: once both characteristics leave the window, the
    // state there equals (S+, 0); the leftover is pure round-off because
    // the scheme's dispersive wake travels with the pulse.
    let model = ModelSpec::dalembert(Grid1D::symmetric(35.0, 0.01).unwrap()).unwrap();
    let state = FieldState::from_real_fn(model.grid, psi0, pi0);
    let (s_plus, s_minus) = dalembert_limits(&state);
    assert!((s_plus - 1.5).abs() < 1e-6, "S+ = {s_plus}");
    assert!((s_minus + 0.5).abs() < 1e-6, "S- = {s_minus}");
    let params = StepParams::leapfrog(1e-3, Boundary::FixedVacuum);
    let fin = evolve(&model, &state, 20.0, &params).unwrap();
    let limit = FieldState {
        time: fin.time,
        ..FieldState::from_real_fn(model.grid, |_| s_plus, |_| 0.0)
    };
    let settle = local_seminorm(&fin, &limit, 5.0, SeminormVariant::KleinGordon).unwrap();
    assert!(settle <= 1e-9, "window did not settle onto the limit: {settle}");
    println!(
        "ACCEPTANCE c06 PASS — limits (1.5, -0.5); settle residue {settle:.1e}; H1 error {coarse:.3e} -> {fine:.3e}, ratio {ratio:.2}"
    );
}

#[test]
fn c07_string_oscillator_equivalence() {
    let grid = Grid1D::symmetric(60.0, 1e-2).unwrap();
    let model = ModelSpec::lamb(grid, 1.0, PolyPotential::soft_well()).unwrap();
    let y0 = 0.5;
    let state = FieldState::from_real_fn(grid, |_| y0, |_| 0.0);
    let dt = 5e-3;
    let params = StepParams::leapfrog(dt, Boundary::FixedVacuum);
    let rec = run(&model, &state, 50.0, &params, &[
        ObserverSpec::Snapshots { every: 50.0 },
        ObserverSpec::PointTrace { x0: 0.0, every: dt },
    ])
    .unwrap();
    // Constant initial data launches no incoming waves.
    let n = (50.0 / dt).round() as usize;
    let w_in_dot = vec![0.0; n + 1];
    let reduced = solve_lamb_reduced(&model, y0, 0.0, &w_in_dot, 50.0, dt).unwrap();
    let tr = &rec.traces[0];
    let max_err = tr
        .values
        .iter()
        .zip(&reduced.y)
        .map(|(z, y)| (z.re - y).abs())
        .fold(0.0f64, f64::max);
    assert!(max_err <= 1e-3, "PDE/ODE mismatch {max_err}");

    let targets: Vec<FieldState> = [-1.0, 0.0, 1.0]
        .iter()
        .map(|&z| FieldState::from_real_fn(grid, move |_| z, |_| 0.0))
        .collect();
    let (dist, idx) =
        dist_to_stationary(&model, rec.snapshots.last().unwrap(), &targets, 5.0).unwrap();
    assert!(dist <= 1e-2, "distance to nearest zero of the force: {dist}");
    assert_eq!(idx, 2, "should settle at +1");
    println!(
        "ACCEPTANCE c07 PASS — max |psi(0,t) - y(t)| = {max_err:.2e}; end-state distance {dist:.2e} to the zero at +1"
    );
}

#[test]
fn c08_u1_spectral_gap_concentration() {
    let grid = Grid1D::symmetric(100.0, 1e-2).unwrap();
    let model = ModelSpec::kg_point(grid, 1.0, vec![0.0], PolyPotential::soft_well()).unwrap();
    let state = FieldState::from_complex_fn(
        grid,
        |x| {
            Complex64::new(1.5 * (-x * x / 4.0).exp(), 0.0) * Complex64::from_polar(1.0, 0.3 * x)
        },
        |x| Complex64::new(0.0, -0.9) * Complex64::new(1.5 * (-x * x / 4.0).exp(), 0.0),
    );
    let params = StepParams::leapfrog(2.5e-3, Boundary::Sponge { width: 15.0 });
    let rec = run(&model, &state, 600.0, &params, &[ObserverSpec::PointTrace {
        x0: 0.0,
        every: 0.05,
    }])
    .unwrap();
    let tr = &rec.traces[0];
    let mut gaps = Vec::new();
    let mut last_report = None;
    for t0 in [100.0, 300.0, 500.0] {
        let rep = point_trace_spectrum(tr, t0, t0 + 100.0).unwrap();
        gaps.push(gap_mass(&rep, 1.0, 0.15).unwrap());
        last_report = Some(rep);
    }
    for w in gaps.windows(2) {
        assert!(
            w[1] <= w[0] + 1e-2,
            "gap mass increased: {:?}",
            gaps
        );
    }
    let rep = last_report.unwrap();
    let (fraction, range) = dominant_cluster(&rep, 1e-3);
    let peak = rep.refined_peak();
    assert!(fraction >= 0.90, "cluster fraction {fraction}");
    assert!(peak.abs() < 1.0, "peak {peak} outside the spectral gap");
    println!(
        "ACCEPTANCE c08 PASS — gap masses {:?} nonincreasing; final window holds {:.1}% in the cluster [{:.3}, {:.3}] with peak {peak:.4} inside (-1, 1)",
        gaps.iter().map(|g| (g * 1e6).round() / 1e6).collect::<Vec<_>>(),
        100.0 * fraction,
        range.0,
        range.1
    );
}

#[test]
fn c09_point_interaction_relaxation_energy_and_causality() {
    let grid = RadialGrid::with_dr(100.0, 1e-2).unwrap();
    let pot = ScalarPotential::double_well();
    let zeta0 = 0.4;
    let f0 = pot.force(zeta0);
    let data = RadialInitialData::from_fn(
        grid,
        move |r| f0 * (-r * r / 2.0).exp(),
        |r| 0.4 * r * r * (-r * r / 3.0).exp(),
        zeta0,
        0.0,
    )
    .unwrap();
    let traj = solve_point3d(&data, &pot, 1e-3, 80.0).unwrap();

    // Convergence to a stable zero of the force.
    let zf = *traj.zeta.last().unwrap();
    assert!((zf.abs() - 1.0).abs() <= 1e-3, "zeta(80) = {zf}");
    assert!(traj.zeta_dot_at(&pot, 80.0).unwrap().abs() <= 1e-3);

    // A priori bound.
    let bound = zeta_apriori_bound(&pot, initial_energy(&data, &pot)).unwrap();
    let max_abs = traj.zeta.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    assert!(max_abs <= bound + 1e-6, "bound {bound} violated by {max_abs}");

    // Energy conservation at fixed quadrature resolution.
    let e0 = energy3d(&data, &traj, &pot, 0.0).unwrap();
    let mut max_drift = 0.0f64;
    for t in [10.0, 25.0, 40.0, 50.0] {
        let e = energy3d(&data, &traj, &pot, t).unwrap();
        max_drift = max_drift.max(((e - e0) / e0).abs());
    }
    assert!(max_drift <= 1e-4, "energy drift {max_drift}");

    // Causality: outside the light cone the field is the untouched tail.
    let d_sing = RadialInitialData::from_fn(grid, |_| 0.0, |_| 0.0, 0.55, 0.0).unwrap();
    let traj_sing = solve_point3d(&d_sing, &pot, 1e-3, 30.0).unwrap();
    for t in [1.0, 10.0, 25.0] {
        for r in [t + 0.5, t + 3.0, t + 20.0] {
            let v = reconstruct_field(&d_sing, &traj_sing, &[r], t).unwrap()[0];
            assert_eq!(v, 0.55 / (4.0 * PI * r), "causality at r={r}, t={t}");
        }
    }
    println!(
        "ACCEPTANCE c09 PASS — zeta(80) = {zf:.6} (stable zero), |zeta| <= {bound:.4}, energy drift {max_drift:.2e}, causality exact"
    );
}

/// The reduced comparison of the adiabatic experiment at the quoted
/// parameters. The phase clause is asserted exactly as specified; see the
/// failure message and the project notes for the measured behavior.
#[test]
fn c10a_adiabatic_phase_agreement() {
    let grid = Grid1D::symmetric(60.0, 1e-2).unwrap();
    let base = n3_model(grid);
    let field = ExternalField::Cosine {
        amplitude: -0.2,
        wavenumber: 0.31,
    };
    let model = base.clone().with_external(field.clone()).unwrap();
    let profile = soliton_profile(&base, 0.6, grid).unwrap();
    // Solitary slice at q0 = 5 (the configuration that actually carries a
    // trackable soliton at desk scale; the paper's zero-velocity start sheds
    // its hump entirely within a few internal periods here).
    let state = soliton_boost(&profile, 0.0, 5.0, grid).unwrap();
    let params = StepParams::leapfrog(2e-3, Boundary::Sponge { width: 10.0 });
    let rec = run(&model, &state, 170.0, &params, &[ObserverSpec::Snapshots {
        every: 1.0,
    }])
    .unwrap();
    let chart = build_chart(&base, 0.6, &velocity_grid(0.8, 65)).unwrap();
    let eff = integrate_effective(
        &chart,
        &field,
        EffectiveState { q: 5.0, p: 0.0 },
        170.0,
        1e-3,
    )
    .unwrap();

    // Window-following |psi|^2 centroid of the soliton hump.
    let mut q = 5.0;
    let mut track = Vec::new();
    for snap in &rec.snapshots {
        let dx = snap.grid.dx();
        let lo = snap.grid.nearest_index(q - 8.0);
        let hi = snap.grid.nearest_index(q + 8.0);
        let (mut wsum, mut xsum) = (0.0, 0.0);
        for i in lo..=hi {
            let w = snap.psi[i].norm_sqr();
            wsum += w * dx;
            xsum += snap.grid.node(i) * w * dx;
        }
        q = xsum / wsum;
        track.push((snap.time, q));
    }
    // The soliton center does oscillate inside the well.
    let q_max = track.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let q_min = track.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    assert!(q_max < 10.1 && q_min > -10.1, "center left the well");
    assert!(q_min < -2.0 && q_max > 1.0, "no oscillation seen");

    // Extrema of both trajectories over the first two reduced periods.
    let extrema = |series: &[(f64, f64)]| -> Vec<(f64, i8)> {
        let mut out: Vec<(f64, i8)> = Vec::new();
        for i in 1..series.len() - 1 {
            let (a, b, c) = (series[i - 1].1, series[i].1, series[i + 1].1);
            let kind = if b < a && b <= c {
                -1
            } else if b > a && b >= c {
                1
            } else {
                0
            };
            if kind != 0 {
                if let Some(last) = out.last() {
                    if last.1 == kind || series[i].0 - last.0 < 8.0 {
                        continue;
                    }
                }
                out.push((series[i].0, kind));
            }
        }
        out
    };
    let eff_series: Vec<(f64, f64)> = eff.iter().step_by(1000).map(|(t, s)| (*t, s.q)).collect();
    let eff_ext = extrema(&eff_series);
    let full_ext = extrema(&track);
    let period = 2.0 * (eff_ext[1].0 - eff_ext[0].0);
    let mut max_phase_err = 0.0f64;
    let mut detail = String::new();
    for target in eff_ext.iter().take(4) {
        let nearest = full_ext
            .iter()
            .filter(|e| e.1 == target.1)
            .min_by(|a, b| {
                (a.0 - target.0)
                    .abs()
                    .partial_cmp(&(b.0 - target.0).abs())
                    .unwrap()
            })
            .expect("matching extremum");
        let err = (nearest.0 - target.0).abs() / period;
        max_phase_err = max_phase_err.max(err);
        detail.push_str(&format!(
            "[eff t={:.0} vs full t={:.0}: {:.0}%] ",
            target.0,
            nearest.0,
            100.0 * err
        ));
    }
    assert!(
        max_phase_err < 0.10,
        "phase error over the first two periods: {:.0}% {detail}(reduced period {period:.1}; the well-trapped radiation shed by the unstable omega = 0.6 member couples to the center motion at desk scale — see notes)",
        100.0 * max_phase_err
    );
    println!(
        "ACCEPTANCE c10a PASS — phase error {:.1}% over two periods {detail}",
        100.0 * max_phase_err
    );
}

#[test]
fn c10b_adiabatic_deviation_monotone_in_epsilon() {
    let grid = Grid1D::symmetric(60.0, 1e-2).unwrap();
    let base = n3_model(grid);
    let profile = soliton_profile(&base, 0.6, grid).unwrap();
    let chart = build_chart(&base, 0.6, &velocity_grid(0.8, 65)).unwrap();
    // Zero-velocity start of the quoted experiment.
    let state = FieldState::from_complex_fn(
        grid,
        |x| Complex64::new(profile.eval(x - 5.0), 0.0),
        |_| Complex64::default(),
    );
    let t_run = 5.0; // common horizon: min(run length, 1/eps) = 5 for all eps
    let mut p_devs = Vec::new();
    let mut q_devs = Vec::new();
    for eps in [0.05, 0.1, 0.2] {
        let field = ExternalField::Cosine {
            amplitude: -eps,
            wavenumber: 0.31,
        };
        let model = base.clone().with_external(field.clone()).unwrap();
        let params = StepParams::leapfrog(2e-3, Boundary::Sponge { width: 10.0 });
        let rec = run(&model, &state, t_run, &params, &[ObserverSpec::Snapshots {
            every: 0.5,
        }])
        .unwrap();
        let eff = integrate_effective(
            &chart,
            &field,
            EffectiveState { q: 5.0, p: 0.0 },
            t_run,
            1e-3,
        )
        .unwrap();
        let rep = compare_adiabatic(&rec, &eff, eps).unwrap();
        assert!(!rep.soliton_lost);
        p_devs.push(rep.max_p_dev);
        q_devs.push(rep.max_q_dev);
    }
    assert!(
        p_devs.windows(2).all(|w| w[1] >= w[0]),
        "momentum deviation not monotone: {p_devs:?}"
    );
    assert!(
        q_devs.windows(2).all(|w| w[1] >= w[0]),
        "position deviation not monotone: {q_devs:?}"
    );
    println!(
        "ACCEPTANCE c10b PASS — deviations grow with eps: P {:?}, Q {:?}",
        p_devs.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
        q_devs.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
    );
}

#[test]
fn c11_scalar_utilities() {
    // Gaussian effective-mass increment, both evaluation paths.
    let sigma = 0.8f64;
    let n = 4001;
    let dr = 10.0 * sigma / (n - 1) as f64;
    let r: Vec<f64> = (0..n).map(|i| i as f64 * dr).collect();
    let norm = (2.0 * PI * sigma * sigma).powf(-1.5);
    let rho: Vec<f64> = r
        .iter()
        .map(|ri| norm * (-ri * ri / (2.0 * sigma * sigma)).exp())
        .collect();
    let expect = 1.0 / (12.0 * PI.powf(1.5) * sigma);
    let fourier = effective_mass_increment(&r, &rho).unwrap();
    let real = effective_mass_increment_realspace(&r, &rho).unwrap();
    let err_f = ((fourier - expect) / expect).abs();
    let err_r = ((real - expect) / expect).abs();
    assert!(err_f <= 1e-4, "fourier path {fourier} vs {expect}");
    assert!(err_r <= 1e-4, "real path {real} vs {expect}");
    assert!(((fourier - real) / expect).abs() <= 1e-4);

    // Uniform-ball transform zero near kR = 4.4934.
    let nb = 4801;
    let drb = 12.0 / (nb - 1) as f64;
    let rb: Vec<f64> = (0..nb).map(|i| i as f64 * drb).collect();
    let ball: Vec<f64> = rb
        .iter()
        .map(|ri| {
            if (*ri - 1.0).abs() < 0.5 * drb {
                0.5
            } else if *ri < 1.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let rep = wiener_check(&rb, &ball, 12.0, 4000);
    assert!(!rep.passes && !rep.zeros.is_empty());
    let zero_err = (rep.zeros[0] - 4.493409).abs();
    assert!(zero_err <= 1e-3, "first zero {}", rep.zeros[0]);
    println!(
        "ACCEPTANCE c11 PASS — m_e {fourier:.8} / {real:.8} vs {expect:.8} (errs {err_f:.1e}, {err_r:.1e}); ball zero {:.5}",
        rep.zeros[0]
    );
}

#[test]
fn c12_structural_suite() {
    // Reversibility.
    let model = gl_model(10.0, 0.02);
    let state = FieldState::from_real_fn(
        model.grid,
        |x| (x / SQRT2).tanh() + 0.1 * (-x * x).exp(),
        |x| 0.05 * (-x * x).exp(),
    );
    let fwd = StepParams::leapfrog(1e-3, Boundary::FixedVacuum);
    let bwd = StepParams::leapfrog(-1e-3, Boundary::FixedVacuum);
    let there = evolve(&model, &state, 1.0, &fwd).unwrap();
    let back = evolve(&model, &there, 1.0, &bwd).unwrap();
    let scale = state.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rev_err = back
        .psi
        .iter()
        .zip(&state.psi)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max)
        / scale;
    assert!(rev_err <= 1e-10, "reversibility {rev_err}");

    // Energy drift per unit time.
    let model_e = gl_model(20.0, 1e-2);
    let kink = kink_profile(model_e.grid, 0.0);
    let rec = run(&model_e, &kink, 10.0, &fwd, &[ObserverSpec::Energy { every: 0.5 }]).unwrap();
    let e0 = rec.energies[0].breakdown.total;
    let drift = rec
        .energies
        .iter()
        .map(|e| ((e.breakdown.total - e0) / e0).abs() / e.time.max(1.0))
        .fold(0.0f64, f64::max);
    assert!(drift <= 1e-6, "energy drift per unit time {drift}");

    // U(1) equivariance.
    let grid = Grid1D::symmetric(10.0, 0.02).unwrap();
    let kg = ModelSpec::kg_point(grid, 1.0, vec![0.0], PolyPotential::soft_well()).unwrap();
    let c_state = FieldState::from_complex_fn(
        grid,
        |x| Complex64::new((-x * x).exp(), 0.2 * (-x * x * 0.3).exp()),
        |x| Complex64::new(0.0, 0.5 * (-x * x).exp()),
    );
    let theta = 0.9;
    let a = evolve(&kg, &c_state.phase_rotated(theta), 1.0, &fwd).unwrap();
    let b = evolve(&kg, &c_state, 1.0, &fwd).unwrap().phase_rotated(theta);
    let u1_err = a
        .psi
        .iter()
        .zip(&b.psi)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0f64, f64::max)
        / scale;
    assert!(u1_err <= 1e-12, "U(1) equivariance {u1_err}");

    // Translation equivariance with the periodic boundary.
    let grid_p = Grid1D::symmetric(8.0, 0.05).unwrap();
    let gl_p = ModelSpec::ginzburg_landau(grid_p).unwrap();
    let p_state = FieldState::from_real_fn(grid_p, |x| 1.0 + 0.2 * (x * 0.785).sin(), |x| {
        0.1 * (x * 0.393).cos()
    });
    let per = StepParams::leapfrog(0.02, Boundary::Periodic);
    let lhs = evolve(&gl_p, &p_state.shifted_nodes(3), 2.0, &per).unwrap();
    let rhs = evolve(&gl_p, &p_state, 2.0, &per).unwrap().shifted_nodes(3);
    let tr_err = lhs
        .psi
        .iter()
        .zip(&rhs.psi)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0f64, f64::max);
    assert!(tr_err <= 1e-12, "translation equivariance {tr_err}");

    // Determinism: identical runs agree bitwise, including their CSV bytes.
    let run_once = || {
        run(&model_e, &kink, 1.0, &fwd, &[
            ObserverSpec::Snapshots { every: 0.5 },
            ObserverSpec::PointTrace { x0: 0.5, every: 0.01 },
        ])
        .unwrap()
    };
    let r1 = run_once();
    let r2 = run_once();
    for (s1, s2) in r1.snapshots.iter().zip(&r2.snapshots) {
        for (a, b) in s1.psi.iter().zip(&s2.psi) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    r1.save_dir(d1.path()).unwrap();
    r2.save_dir(d2.path()).unwrap();
    for name in ["snapshot_000000.csv", "snapshot_000002.csv", "trace_000.csv", "record.json"] {
        let b1 = std::fs::read(d1.path().join(name)).unwrap();
        let b2 = std::fs::read(d2.path().join(name)).unwrap();
        assert_eq!(b1, b2, "artifact {name} differs between identical runs");
    }
    println!(
        "ACCEPTANCE c12 PASS — reversibility {rev_err:.1e}, drift {drift:.1e}/t, U(1) {u1_err:.1e}, translation {tr_err:.1e}, byte-identical artifacts"
    );
}
