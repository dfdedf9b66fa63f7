//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances are fixed here and never loosened to pass.

use std::process::ExitCode;
use std::time::Instant;

use kdvcurves::checks::{calculus_suite, eca_curve_suite, eca_suite, euclid_suite, miura_suite, CheckReport, Fixture};
use kdvcurves::eca::{eca_from_curvature, hamiltonian, tangent_embed, EcaCurve, EcaTangent, DEFAULT_SUBSTEPS};
use kdvcurves::euclid::curve::euc_from_curvature;
use kdvcurves::flow::{
    commutativity_residual, curve_curvature_consistency, evolve, flow_conjugacy_residual, FlowSpec, FlowState,
    Integrator, Model, Representation, Scheme,
};
use kdvcurves::miura::{admissible_intertwine_input, intertwine_sides, miura_curvature, pullback_hamiltonian_residual};
use kdvcurves::seeds::{random_band_limited, random_complex_band_limited, rng_from_seed};
use kdvcurves::{ClosureFailure, Error, PeriodicGrid, RealField};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

/// One measured quantity against its tolerance.
struct Item {
    label: String,
    value: f64,
    tol: f64,
    /// `true` when larger is better (convergence orders).
    at_least: bool,
}

impl Item {
    fn below(label: impl Into<String>, value: f64, tol: f64) -> Self {
        Item { label: label.into(), value, tol, at_least: false }
    }

    fn above(label: impl Into<String>, value: f64, tol: f64) -> Self {
        Item { label: label.into(), value, tol, at_least: true }
    }

    fn flag(label: impl Into<String>, ok: bool) -> Self {
        Item::below(label, if ok { 0.0 } else { 1.0 }, 0.5)
    }

    fn pass(&self) -> bool {
        if self.at_least {
            self.value >= self.tol
        } else {
            self.value <= self.tol
        }
    }
}

fn grid(n: usize) -> PeriodicGrid {
    PeriodicGrid::new(n).unwrap()
}

fn cosine(g: &PeriodicGrid, base: f64, eps: f64, mode: f64) -> RealField {
    RealField::from_fn(g, |s| base + eps * (mode * s).cos())
}

fn star(g: &PeriodicGrid, eps: f64) -> EcaCurve {
    EcaCurve::from_polar(g, |t| 1.0 + eps * (3.0 * t).cos()).unwrap()
}

fn report_items(report: &CheckReport, names: &[&str]) -> Vec<Item> {
    names
        .iter()
        .map(|name| match report.checks.get(*name) {
            Some(c) => match c.residual {
                Some(r) => Item::below(*name, r, c.tolerance),
                None => Item::below(format!("{name} ({})", c.error.clone().unwrap_or_default()), f64::NAN, c.tolerance),
            },
            None => Item::below(format!("{name} (missing)"), f64::NAN, 0.0),
        })
        .collect()
}

fn fixture(rng: &mut ChaCha8Rng, n: usize, trials: usize) -> Fixture<'_, ChaCha8Rng> {
    Fixture { grid: grid(n), rng, trials, max_mode: 16 }
}

fn c1_calculus() -> Vec<Item> {
    let mut rng = rng_from_seed(101);
    let report = calculus_suite(&mut fixture(&mut rng, 128, 50));
    report_items(&report, &["calculus.integration_by_parts", "calculus.ds_of_ds_inv", "calculus.shift_commutation"])
}

/// Central difference of `H_m(κ(γ + hX))`; off the constraint the curvature
/// formula still varies smoothly, and the even-order error cancels.
fn dh_fd(gamma: &EcaCurve, m: usize, t: &EcaTangent, h: f64) -> f64 {
    let x = tangent_embed(gamma, t).unwrap();
    let value = |eps: f64| {
        let g = gamma.as_plane().add(&x.scale(eps));
        let d1 = g.ds();
        hamiltonian(&d1.det(&d1.ds()), m).unwrap()
    };
    (value(h) - value(-h)) / (2.0 * h)
}

fn c2_omega0_pairing() -> Vec<Item> {
    let mut rng = rng_from_seed(202);
    let g = grid(128);
    let kappa = cosine(&g, 1.0, 0.2, 1.0);
    let report = eca_suite(&mut fixture(&mut rng, 128, 20), &kappa, None);
    let mut items = report_items(&report, &["eca.omega0_pairing_n1", "eca.omega0_pairing_n2", "eca.omega0_pairing_n3"]);
    // finite-difference oracle for dH_n on a closed curve
    let gamma = star(&g, 0.05);
    let k = gamma.curvature();
    for n in 1..=3 {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let t = EcaTangent::new(random_band_limited(&g, &mut rng, 8, 0.1, 1.0));
            let exact = kdvcurves::eca::differential_h(&k, n, &t).unwrap();
            let fd = dh_fd(&gamma, n, &t, 1e-5);
            let scale = exact.abs().max(fd.abs()).max(hamiltonian(&k, n).unwrap().abs());
            worst = worst.max((fd - exact).abs() / scale);
        }
        items.push(Item::below(format!("dH{n} vs finite difference"), worst, 1e-7));
    }
    items
}

fn c3_omega1_pairing() -> Vec<Item> {
    let mut rng = rng_from_seed(303);
    let kappa = cosine(&grid(128), 1.0, 0.2, 1.0);
    let report = eca_suite(&mut fixture(&mut rng, 128, 20), &kappa, None);
    report_items(&report, &["eca.omega1_pairing_n1", "eca.omega1_pairing_n2"])
}

fn c4_level_sets() -> Vec<Item> {
    let mut rng = rng_from_seed(404);
    let kappa = cosine(&grid(128), 1.0, 0.2, 1.0);
    let report = eca_suite(&mut fixture(&mut rng, 128, 20), &kappa, None);
    report_items(
        &report,
        &["eca.level_integrals_m1", "eca.level_integrals_m2", "eca.lemma31", "eca.omega2_skew", "eca.omega2_pairing_n1"],
    )
}

fn c5_moment_maps() -> Vec<Item> {
    let mut rng = rng_from_seed(505);
    let kappa = cosine(&grid(128), 1.0, 0.2, 1.0);
    let mut fx = fixture(&mut rng, 128, 20);
    let mut report = eca_suite(&mut fx, &kappa, None);
    report.merge(euclid_suite(&mut fx, &kappa, None));
    report_items(&report, &["eca.moment_map_h1", "eca.moment_map_h2_level1", "euclid.moment_map_h1"])
}

fn c6_phi_form() -> Vec<Item> {
    let mut rng = rng_from_seed(606);
    let gamma = star(&grid(128), 0.05);
    let report = eca_curve_suite(&mut fixture(&mut rng, 128, 20), &gamma);
    report_items(&report, &["eca.phi_form_k2"])
}

fn c7_groups() -> Vec<Item> {
    let mut rng = rng_from_seed(707);
    let g = grid(128);
    let gamma = star(&g, 0.05);
    let euc = euc_from_curvature(&cosine(&g, 1.0, 0.2, 2.0), 1e-8).unwrap();
    let mut fx = fixture(&mut rng, 128, 10);
    let mut report = eca_curve_suite(&mut fx, &gamma);
    report.merge(euclid_suite(&mut fx, &euc.curvature(), Some(&euc)));
    report_items(&report, &["eca.sl2_invariance", "eca.sl2_annihilation", "euclid.e2_invariance"])
}

fn drifts(model: Model, kappa0: &RealField, t: f64, dt: f64) -> Result<Vec<f64>, Error> {
    let spec = FlowSpec::new(model, Representation::Curvature, 1, t, dt).with_scheme(Scheme::STIFF);
    let rec = evolve(&FlowState::Curvature(kappa0.clone()), &spec)?;
    Ok(rec.invariants.quantities.iter().take(3).map(|q| q.max_rel_drift).collect())
}

fn conservation(model: Model, tag: &str) -> Vec<Item> {
    let g = grid(256);
    let kappa0 = cosine(&g, 1.0, 0.3, 1.0);
    let mut items = Vec::new();
    match drifts(model, &kappa0, 1.0, 1e-5) {
        Ok(d) => {
            for (j, v) in d.iter().enumerate() {
                items.push(Item::below(format!("{tag}{} drift", j + 1), *v, 1e-6));
            }
        }
        Err(e) => items.push(Item::below(format!("{tag} reference run: {e}"), f64::NAN, 1e-6)),
    }
    // refinement: H1 is linear in κ and preserved exactly by any RK scheme,
    // so the order is read off H2 and H3. Below dt ≈ 1e-3 the drift sits at
    // the roundoff floor, and in this range the dispersive term is stiff, so
    // single halvings are noisy; the order is the least-squares slope.
    let steps = [0.02, 0.01, 0.005, 0.0025];
    let runs: Result<Vec<_>, _> = steps.iter().map(|&dt| drifts(model, &kappa0, 1.0, dt)).collect();
    match runs {
        Ok(runs) => {
            for j in 1..3 {
                let pts: Vec<(f64, f64)> = steps.iter().zip(&runs).map(|(dt, d)| (dt.ln(), d[j].ln())).collect();
                items.push(Item::above(format!("{tag}{} order", j + 1), slope(&pts), 3.5));
            }
        }
        Err(e) => items.push(Item::below(format!("{tag} refinement runs: {e}"), f64::NAN, 0.0)),
    }
    items
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn c8_conservation() -> Vec<Item> {
    let mut items = conservation(Model::Eca, "H");
    items.extend(conservation(Model::Euclidean, "Hhat"));
    items
}

fn c9_commutativity() -> Vec<Item> {
    let kappa0 = cosine(&grid(128), 1.0, 0.2, 1.0);
    let mut items = vec![match commutativity_residual(&kappa0, 1, 2, 0.05, 1e-5, Scheme::STIFF) {
        Ok(r) => Item::below("residual N=128 dt=1e-5", r, 1e-6),
        Err(e) => Item::below(format!("reference run: {e}"), f64::NAN, 1e-6),
    }];
    // at N=128 the residual is already at roundoff; the order is measured on
    // a coarser grid with a larger seed where the time error dominates
    let k64 = cosine(&grid(64), 1.0, 0.4, 1.0);
    let r: Vec<_> = [1e-4, 5e-5].iter().map(|&dt| commutativity_residual(&k64, 1, 2, 0.05, dt, Scheme::STIFF)).collect();
    match &r[..] {
        [Ok(a), Ok(b)] => items.push(Item::above("order N=64", (a / b).log2(), 3.5)),
        _ => items.push(Item::below("refinement runs failed", f64::NAN, 0.0)),
    }
    items
}

fn c10_curve_consistency() -> Vec<Item> {
    let g = grid(128);
    let mut items = Vec::new();
    let eca = FlowState::Eca(EcaCurve::from_polar(&g, |t| 1.0 + 0.02 * (3.0 * t).cos()).unwrap());
    let scheme = Scheme { integrator: Integrator::Rk4, dealias: true };
    match curve_curvature_consistency(&eca, 1, 0.1, 1e-5, scheme) {
        Ok(r) => {
            items.push(Item::below("eca residual", r.residual, 1e-6));
            items.push(Item::below("eca det drift", r.constraint_drift, 1e-7));
        }
        Err(e) => items.push(Item::below(format!("eca run: {e}"), f64::NAN, 1e-6)),
    }
    let euc = FlowState::Euc(euc_from_curvature(&cosine(&g, 1.0, 0.2, 2.0), 1e-8).unwrap());
    match curve_curvature_consistency(&euc, 1, 0.1, 1e-5, Scheme::RK4) {
        Ok(r) => {
            items.push(Item::below("euclidean residual", r.residual, 1e-6));
            items.push(Item::below("euclidean speed drift", r.constraint_drift, 1e-7));
        }
        Err(e) => items.push(Item::below(format!("euclidean run: {e}"), f64::NAN, 1e-6)),
    }
    items
}

fn c11_miura() -> Vec<Item> {
    let g = grid(128);
    let kh = cosine(&g, 1.0, 0.2, 1.0);
    let mut items = Vec::new();
    // relation κ = κ̂²/4 + iκ̂_s/2, checked sample by sample
    let k = miura_curvature(&kh);
    let dk = kh.ds();
    let exact = kh.samples().iter().zip(dk.samples()).map(|(a, b)| Complex64::new(a * a / 4.0, b / 2.0));
    let rel = k.samples().iter().zip(exact).map(|(z, w)| (z - w).norm()).fold(0.0, f64::max);
    items.push(Item::below("curvature relation", rel, 1e-15));

    let mut rng = rng_from_seed(1111);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let kappa_hat = random_band_limited(&g, &mut rng, 32, 1.0, 0.5);
        let raw = random_complex_band_limited(&g, &mut rng, 32, Complex64::new(0.0, 0.0), 1.0);
        let f = admissible_intertwine_input(&kappa_hat, &raw);
        let (lhs, rhs) = intertwine_sides(&kappa_hat, &f).unwrap();
        worst = worst.max(lhs.max_abs_diff(&rhs) / (1.0 + lhs.max_abs().max(rhs.max_abs())));
    }
    items.push(Item::below("intertwining (20 random pairs)", worst, 1e-9));

    for m in 1..=3 {
        let p = pullback_hamiltonian_residual(&kh, m).unwrap();
        items.push(Item::below(format!("H{m} pullback"), p.residual.max(p.imaginary), 1e-9));
    }
    match flow_conjugacy_residual(&kh, 1, 0.1, 1e-5, Scheme::STIFF) {
        Ok(r) => items.push(Item::below("flow conjugacy n=1 t=0.1", r, 1e-6)),
        Err(e) => items.push(Item::below(format!("flow conjugacy: {e}"), f64::NAN, 1e-6)),
    }
    let report = miura_suite(&mut fixture(&mut rng, 128, 20), &kh, None);
    items.extend(report_items(&report, &["miura.omega_pullback_k0", "miura.omega_pullback_k1"]));
    items
}

fn c12_reconstruction() -> Vec<Item> {
    let g = grid(128);
    let mut items = Vec::new();
    let k_star = star(&g, 0.05).curvature();
    match eca_from_curvature(&k_star, 1e-8, DEFAULT_SUBSTEPS) {
        Ok(c) => items.push(Item::below("eca round trip", c.curvature().max_abs_diff(&k_star), 1e-8)),
        Err(e) => items.push(Item::below(format!("eca round trip: {e}"), f64::NAN, 1e-8)),
    }
    let k_hat = cosine(&g, 1.0, 0.2, 2.0);
    match euc_from_curvature(&k_hat, 1e-8) {
        Ok(c) => items.push(Item::below("euclidean round trip", c.curvature().max_abs_diff(&k_hat), 1e-8)),
        Err(e) => items.push(Item::below(format!("euclidean round trip: {e}"), f64::NAN, 1e-8)),
    }
    let quarter = eca_from_curvature(&RealField::constant(&g, 0.25), 1e-8, DEFAULT_SUBSTEPS);
    let minus_identity = matches!(
        &quarter,
        Err(Error::NotClosed(ClosureFailure::Monodromy { matrix, .. }))
            if (matrix[0][0] + 1.0).abs() < 1e-8 && (matrix[1][1] + 1.0).abs() < 1e-8
                && matrix[0][1].abs() < 1e-8 && matrix[1][0].abs() < 1e-8
    );
    items.push(Item::flag("kappa=1/4 monodromy -I rejected", minus_identity));
    let half = euc_from_curvature(&RealField::constant(&g, 0.5), 1e-8);
    let index = matches!(
        &half,
        Err(Error::NotClosed(ClosureFailure::Euclidean { rotation_index_defect, .. }))
            if (rotation_index_defect - 0.5).abs() < 1e-12
    );
    items.push(Item::flag("kappa_hat=1/2 rotation index rejected", index));
    items
}

type Criterion = (&'static str, fn() -> Vec<Item>);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("calculus identities", c1_calculus),
        ("omega0 Hamiltonian pairing", c2_omega0_pairing),
        ("omega1 Hamiltonian pairing", c3_omega1_pairing),
        ("level-set machinery", c4_level_sets),
        ("moment maps", c5_moment_maps),
        ("phi-form equivalence", c6_phi_form),
        ("group invariance", c7_groups),
        ("conservation under flow", c8_conservation),
        ("flow commutativity", c9_commutativity),
        ("curve/curvature consistency", c10_curve_consistency),
        ("Miura suite", c11_miura),
        ("reconstruction round trips", c12_reconstruction),
    ];
    let mut failed = 0;
    for (j, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let items = run();
        let ok = !items.is_empty() && items.iter().all(Item::pass);
        let detail: Vec<String> = items
            .iter()
            .map(|i| {
                let op = if i.at_least { ">=" } else { "<=" };
                let mark = if i.pass() { "" } else { " !" };
                format!("{} {:.2e} {op} {:e}{mark}", i.label, i.value, i.tol)
            })
            .collect();
        println!(
            "criterion {:2} {} {name} [{:.1}s]: {}",
            j + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            detail.join("; ")
        );
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
