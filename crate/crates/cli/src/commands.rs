use std::f64::consts::{PI, TAU};

use kirkwood::dynamics::{
    homoclinic_crossing, numeric_fixed_point, perturbative_error_scan, IntegratorConfig, ManifoldOptions, SectionMap,
};
use kirkwood::fourier::{c_star, eccentricity_scaling, phi_ratio_limit, FourierTable};
use kirkwood::return_map::{ContextOptions, FixedPointKind, Linearization, ResonanceContext, ResonanceFunctions, Section};
use kirkwood::separatrix::{homoclinic_estimate, Separatrix};
use kirkwood::thresholds::{
    asymmetric_threshold, boundary_threshold, check_assumption_a, BoundaryOptions, ThresholdOptions,
};

use crate::output::{Cell, Output, Table};
use crate::svg::{line_plot, Series};
use crate::{Command, Failure, RunConfig};

type Outcome = Result<(), Failure>;

pub(crate) fn dispatch(cfg: &RunConfig, out: &mut Output) -> Outcome {
    match &cfg.command {
        Command::Phi { sweep } => phi(cfg, sweep, out),
        Command::Separatrix { j } => separatrix(cfg, *j, out),
        Command::FixedPoints { numeric } => fixed_points(cfg, *numeric, out),
        Command::Homoclinic { numeric, seeds } => homoclinic(cfg, *numeric, *seeds, out),
        Command::Table1 => table1(cfg, out),
        Command::Table2 => table2(out),
        Command::Fourier { mmax, nmax } => fourier(cfg, *mmax, *nmax, out),
        Command::Validate => validate(cfg, out),
    }
}

fn context(cfg: &RunConfig, e: f64, section: Section) -> Result<ResonanceContext, Failure> {
    let options = ContextOptions { quadrature_tol: cfg.tol, ..ContextOptions::default() };
    Ok(ResonanceContext::with_options(cfg.p, cfg.q, e, section, options)?)
}

fn grid(n: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
}

fn phi(cfg: &RunConfig, sweep: &[f64], out: &mut Output) -> Outcome {
    let section = cfg.section.into();
    let mut zeros = Table::new("phi_zeros", &["e", "l", "kind"]);
    if sweep.is_empty() {
        let ctx = context(cfg, cfg.e, section)?;
        let mut t = Table::new("phi", &["l", "phi", "phi_prime", "psi", "chi", "chi_prime"]);
        let mut curve = Vec::new();
        for l in grid(cfg.grid, 0.0, TAU) {
            let m = ctx.integrals(l)?;
            curve.push((l, m.phi));
            t.push(vec![l.into(), m.phi.into(), m.phi_prime.into(), m.psi.into(), m.chi.into(), m.chi_prime.into()]);
        }
        out.table(&t)?;
        push_zeros(&mut zeros, &ctx)?;
        out.svg("phi", &line_plot(&title(cfg, "φ(l)"), "l", "φ", &[Series::new(format!("e = {}", cfg.e), curve)]))?;
    } else {
        let mut columns = vec!["l".to_string()];
        columns.extend(sweep.iter().map(|e| format!("phi_e{e}")));
        let mut t = Table::with_columns("phi", columns);
        let contexts = sweep.iter().map(|&e| context(cfg, e, section)).collect::<Result<Vec<_>, _>>()?;
        let mut curves: Vec<Vec<(f64, f64)>> = vec![Vec::new(); sweep.len()];
        for l in grid(cfg.grid, 0.0, TAU) {
            let mut row = vec![Cell::from(l)];
            for (k, ctx) in contexts.iter().enumerate() {
                let v = ctx.phi(l)?;
                curves[k].push((l, v));
                row.push(v.into());
            }
            t.push(row);
        }
        out.table(&t)?;
        for ctx in &contexts {
            push_zeros(&mut zeros, ctx)?;
        }
        let series: Vec<Series> =
            sweep.iter().zip(curves).map(|(e, c)| Series::new(format!("e = {e}"), c)).collect();
        out.svg("phi", &line_plot(&title(cfg, "φ(l)"), "l", "φ", &series))?;
    }
    out.table(&zeros)?;
    Ok(())
}

fn push_zeros(t: &mut Table, ctx: &ResonanceContext) -> Outcome {
    let report = check_assumption_a(&ResonanceFunctions::new(ctx)?)?;
    for z in &report.zeros {
        let kind = if report.extra_zeros.contains(z) { "extra" } else { "symmetric" };
        t.push(vec![ctx.e.into(), (*z).into(), kind.into()]);
    }
    Ok(())
}

fn title(cfg: &RunConfig, what: &str) -> String {
    format!("{what}, q/p = {}/{}", cfg.q, cfg.p)
}

fn first_hyperbolic(ctx: &ResonanceContext) -> Result<i32, Failure> {
    for j in 0..2 * ctx.p as i32 {
        if ctx.phi_prime(j as f64 * PI / ctx.p as f64)? < 0.0 {
            return Ok(j);
        }
    }
    Err(Failure::Numeric(kirkwood::Error::Degenerate("no hyperbolic point on the symmetry lines".into())))
}

fn separatrix(cfg: &RunConfig, j: Option<i32>, out: &mut Output) -> Outcome {
    let ctx = context(cfg, cfg.e, cfg.section.into())?;
    let funcs = ResonanceFunctions::new(&ctx)?;
    let j = match j {
        Some(j) => j,
        None => first_hyperbolic(&ctx)?,
    };
    let sep = Separatrix::new(&funcs, j)?;
    let mut t = Table::new("separatrix", &["x", "l", "phi", "u", "big_u", "v", "action"]);
    let (mut u_curve, mut phi_curve) = (Vec::new(), Vec::new());
    for x in grid(cfg.grid, -sep.reach, sep.reach) {
        let l = sep.center + x;
        let (u, v) = (sep.u(x)?, sep.v(x)?);
        let phi = funcs.phi(l);
        u_curve.push((x, 0.1 * u));
        phi_curve.push((x, phi));
        t.push(vec![
            x.into(),
            l.into(),
            phi.into(),
            u.into(),
            sep.big_u(x)?.into(),
            v.into(),
            sep.action(l, cfg.mu)?.into(),
        ]);
    }
    out.table(&t)?;
    let mut s = Table::new("separatrix_slopes", &["j", "center", "u_slope", "v_slope", "eigen_v_slope"]);
    s.push(vec![j.into(), sep.center.into(), sep.u_slope().into(), sep.v_slope().into(), sep.eigen_v_slope().into()]);
    out.table(&s)?;
    let plot = line_plot(
        &title(cfg, "separatrix"),
        "l - jπ/p",
        "value",
        &[Series::new("0.1 u", u_curve), Series::new("φ", phi_curve)],
    );
    out.svg("separatrix", &plot)?;
    Ok(())
}

fn linearization_cells(lin: &Linearization) -> Vec<Cell> {
    match *lin {
        Linearization::Saddle { stable, unstable, .. } => vec!["saddle".into(), stable.into(), unstable.into()],
        Linearization::Center { modulus, rotation } => vec!["center".into(), modulus.into(), rotation.into()],
    }
}

fn fixed_points(cfg: &RunConfig, numeric: bool, out: &mut Output) -> Outcome {
    let ctx = context(cfg, cfg.e, cfg.section.into())?;
    let funcs = ResonanceFunctions::new(&ctx)?;
    let mut columns = vec!["j", "l", "lambda", "action", "kind", "linearization", "first", "second"];
    if numeric {
        columns.extend(["numeric_l", "numeric_action", "numeric_linearization", "numeric_first", "numeric_second", "status"]);
    }
    let mut t = Table::new("fixed_points", &columns);
    let map = if numeric { Some(SectionMap::new(&ctx, cfg.mu)?) } else { None };
    let s = cfg.mu.sqrt();
    for fp in funcs.fixed_points(cfg.mu)? {
        let action = ctx.lstar() + fp.lambda * s;
        let kind = match fp.kind {
            FixedPointKind::Hyperbolic => "hyperbolic",
            FixedPointKind::Elliptic => "elliptic",
        };
        let mut row = vec![fp.j.into(), fp.l.into(), fp.lambda.into(), action.into(), kind.into()];
        row.extend(linearization_cells(&fp.linearization));
        if let Some(map) = &map {
            match numeric_fixed_point(map, ctx.p, fp.l, action) {
                Ok(n) => {
                    row.extend([n.l.into(), n.action.into()]);
                    row.extend(linearization_cells(&n.linearization));
                    row.push("ok".into());
                }
                Err(err) => {
                    row.extend([f64::NAN.into(), f64::NAN.into(), "".into(), f64::NAN.into(), f64::NAN.into()]);
                    row.push(err.kind().into());
                }
            }
        }
        t.push(row);
    }
    out.table(&t)?;
    Ok(())
}

fn homoclinic(cfg: &RunConfig, numeric: bool, seeds: usize, out: &mut Output) -> Outcome {
    // The section is fixed by the selection rule, not by --section.
    let ctx = context(cfg, cfg.e, Section::Zero)?;
    let funcs = ResonanceFunctions::new(&ctx)?;
    let est = homoclinic_estimate(&funcs, None, cfg.mu)?;
    let section = match est.section {
        Section::Zero => "0",
        Section::Pi => "pi",
    };
    let mut columns = vec!["section", "j", "l_h", "u", "v", "leading", "corrected"];
    if numeric {
        columns.extend(["stable_action", "unstable_action", "leading_error_over_mu"]);
    }
    let mut t = Table::new("homoclinic", &columns);
    let mut row: Vec<Cell> = vec![
        section.into(),
        est.j.into(),
        est.l_h.into(),
        est.u_at_crossing.into(),
        est.v_at_crossing.into(),
        est.leading.into(),
        est.corrected.into(),
    ];
    if numeric {
        let opts = ManifoldOptions { seeds, ..ManifoldOptions::default() };
        let h = homoclinic_crossing(&funcs, cfg.mu, &opts)?;
        row.extend([h.stable_action.into(), h.unstable_action.into(), (h.leading_error() / cfg.mu).into()]);
    }
    t.push(row);
    out.table(&t)?;
    Ok(())
}

/// Published resonance-boundary eccentricities at μ = 1e-3.
const TABLE1_REFERENCE: [(u32, u32, f64); 6] =
    [(2, 3, 0.10), (1, 2, 0.13), (3, 7, 0.08), (2, 5, 0.08), (1, 3, 0.07), (1, 4, 0.09)];

fn table1(cfg: &RunConfig, out: &mut Output) -> Outcome {
    let opts = BoundaryOptions::default();
    let mut t = Table::new(
        "table1",
        &["ratio", "p", "q", "reference", "truncated", "continuation", "criterion_sensitive", "continuation_ends"],
    );
    for (p, q, reference) in TABLE1_REFERENCE {
        let b = boundary_threshold(p, q, cfg.mu, &opts)?;
        let ends: Vec<String> = b.continuation_ends.iter().map(|c| format!("j={} e={:.4}: {}", c.j, c.e, c.reason)).collect();
        t.push(vec![
            format!("{q}/{p}").into(),
            p.into(),
            q.into(),
            reference.into(),
            b.truncated.into(),
            b.continuation.into(),
            b.criterion_sensitive.into(),
            ends.join("; ").into(),
        ]);
    }
    out.table(&t)?;
    Ok(())
}

/// Published onset eccentricities of asymmetric libration.
const TABLE2_REFERENCE: [(u32, f64); 6] =
    [(7, 0.365900), (6, 0.320133), (5, 0.265532), (4, 0.199749), (3, 0.121094), (2, 0.036083)];

fn table2(out: &mut Output) -> Outcome {
    let opts = ThresholdOptions::default();
    let mut t = Table::new("table2", &["ratio", "p", "q", "e_star", "reference", "difference"]);
    for (p, reference) in TABLE2_REFERENCE {
        let e = asymmetric_threshold(p, 1, &opts)?;
        t.push(vec![format!("1/{p}").into(), p.into(), 1u32.into(), e.into(), reference.into(), (e - reference).into()]);
    }
    out.table(&t)?;
    Ok(())
}

fn fourier(cfg: &RunConfig, mmax: usize, nmax: usize, out: &mut Output) -> Outcome {
    let ctx = context(cfg, cfg.e, cfg.section.into())?;
    let table = FourierTable::with_grid(&ctx, mmax, nmax, cfg.grid)?;
    let mut t = Table::new("fourier_coefficients", &["m", "n", "c"]);
    for (m, n, c) in table.entries().filter(|(m, n, _)| !(*m == 0 && *n < 0)) {
        t.push(vec![m.into(), n.into(), c.into()]);
    }
    out.table(&t)?;

    let mut cs = Table::new(
        "c_star",
        &["p", "q", "numeric_limit", "closed_form", "closed_form_mismatch", "reconciled", "reconciled_mismatch", "phi_ratio_limit"],
    );
    let mut pairs = vec![(1, 2), (1, 3), (2, 3)];
    if !pairs.contains(&(cfg.p, cfg.q)) {
        pairs.push((cfg.p, cfg.q));
    }
    for (p, q) in pairs {
        let c = c_star(p, q)?;
        // φ ratio at a small e on the g = 0 section, where it tends to -c*.
        let small = ResonanceContext::new(p, q, 0.02, Section::Zero)?;
        let ratio = phi_ratio_limit(&small, 0.3 / p as f64)?;
        cs.push(vec![
            p.into(),
            q.into(),
            c.numeric_limit.into(),
            c.closed_form.into(),
            c.closed_form_mismatch.into(),
            c.reconciled.into(),
            c.reconciled_mismatch.into(),
            (-ratio).into(),
        ]);
    }
    out.table(&cs)?;

    let mut sc = Table::new("coefficient_scaling", &["m", "n", "expected_power", "leading_power", "exponent", "noise_ratio"]);
    for row in eccentricity_scaling(cfg.p, cfg.q, mmax.min(5), nmax.min(5))? {
        let leading = row.leading_power.map_or(Cell::Int(-1), Cell::from);
        sc.push(vec![row.m.into(), row.n.into(), row.expected.into(), leading, row.exponent.into(), row.noise_ratio.into()]);
    }
    out.table(&sc)?;
    Ok(())
}

fn validate(cfg: &RunConfig, out: &mut Output) -> Outcome {
    let ctx = context(cfg, cfg.e, cfg.section.into())?;
    let funcs = ResonanceFunctions::new(&ctx)?;
    let mut t = Table::new("validation", &["check", "value", "low", "high", "pass"]);
    let mut failed = Vec::new();
    let mut check = |name: &str, value: f64, low: f64, high: f64| {
        let pass = value >= low && value <= high;
        if !pass {
            failed.push(name.to_string());
        }
        t.push(vec![name.into(), value.into(), low.into(), high.into(), pass.into()]);
    };

    // Offsets in λ stay inside the energy surface at μ = 1e-4.
    let lam = 8.5 * (ctx.lstar() - ctx.gstar());
    let points = [(0.7, -lam), (0.7, 0.0), (2.0, lam), (2.0, 0.0), (4.0, -lam)];
    let scan = perturbative_error_scan(&funcs, &points, &[1e-4, 1e-5, 1e-6], IntegratorConfig::tight())?;
    check("first_order_exponent", scan.first_order_exponent, 1.8, 2.2);
    check("scaled_exponent", scan.scaled_exponent, 1.3, 1.7);
    check("scan_energy_drift", scan.max_energy_drift, 0.0, 1e-10);

    let shift = TAU / ctx.p as f64;
    let (mut odd, mut periodic): (f64, f64) = (0.0, 0.0);
    for i in 0..256 {
        let l = -PI + TAU * (i as f64 + 0.5) / 256.0;
        let v = ctx.phi(l)?;
        odd = odd.max((v + ctx.phi(-l)?).abs());
        periodic = periodic.max((v - ctx.phi(l + shift)?).abs());
    }
    check("phi_oddness", odd, 0.0, 1e-9);
    check("phi_periodicity", periodic, 0.0, 1e-9);

    let map = SectionMap::new(&ctx, cfg.mu)?;
    let (mut reversal, mut drift): (f64, f64) = (0.0, 0.0);
    let width = 0.3 * (ctx.lstar() - ctx.gstar());
    for i in 0..20 {
        let l = TAU * (i as f64 + 0.25) / 20.0;
        let action = ctx.lstar() + width * ((i % 5) as f64 / 2.0 - 1.0);
        let one = map.iterate(l, action, 1)?;
        let back = map.iterate(-one.l, one.action, 1)?;
        let dl = (back.l + l + PI).rem_euclid(TAU) - PI;
        reversal = reversal.max(dl.abs()).max((back.action - action).abs());
        drift = drift.max(map.iterate(l, action, ctx.p as i32)?.energy_drift);
    }
    check("reversibility", reversal, 0.0, 1e-9);
    check("energy_drift_per_p_returns", drift, 0.0, 1e-10);

    out.table(&t)?;
    if failed.is_empty() { Ok(()) } else { Err(Failure::Validation(failed)) }
}
