use std::time::Instant;

use serde_json::{json, Map, Value};

use asep_lab::duality::{
    all_configurations, chambers_up_to, negative_control_no_liggett, verify_fictitious, verify_fictitious_segment,
    verify_fullspace, verify_halfline, verify_segment, DualityReport, Eta,
};
use asep_lab::kpz::{scaled_asep_moment, she_moment_nested, she_moment_residue_form, Boundary, ContourSpec, KpzParams};
use asep_lab::model::{parse_rational, ModelParams, OrderedSites, SegmentParams, SegmentState};
use asep_lab::moments::{v_n, QuadratureSpec};
use asep_lab::segment::{build_dual_matrix, solve_with};
use asep_lab::simulator::{estimate, SimConfig, SimModel};

use crate::args::{BoundaryKind, KpzArgs, KpzForm, MomentsArgs, Rates, SegmentArgs, SimKind, SimulateArgs, VerifyArgs, VerifyMode};
use crate::output::Table;
use crate::CliError;

fn record(pairs: Vec<(String, Value)>) -> Map<String, Value> {
    pairs.into_iter().collect()
}

fn x_columns(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn log(what: &str, start: Instant) {
    eprintln!("{what} ({:.3}s)", start.elapsed().as_secs_f64());
}

impl Rates {
    pub fn model(&self) -> Result<ModelParams, CliError> {
        let (p, q) = (parse_rational(&self.p)?, parse_rational(&self.q)?);
        Ok(match (&self.rho, &self.alpha, &self.gamma) {
            (Some(rho), _, _) => ModelParams::with_rho(p, q, parse_rational(rho)?)?,
            (None, Some(a), Some(g)) => ModelParams::new(p, q, parse_rational(a)?, parse_rational(g)?)?,
            _ => return Err(CliError::Usage("give --rho, or both --alpha and --gamma".into())),
        })
    }

    fn segment(&self, ell: Option<usize>, rho_ell: Option<&str>) -> Result<SegmentParams, CliError> {
        let ell = ell.ok_or_else(|| CliError::Usage("--ell is required for the segment".into()))?;
        let rho_ell = rho_ell.ok_or_else(|| CliError::Usage("--rho-ell is required for the segment".into()))?;
        let m = self.model()?;
        Ok(SegmentParams::with_rhos(m.p_exact().clone(), m.q_rate_exact().clone(), m.rho_exact(), parse_rational(rho_ell)?, ell)?)
    }
}

fn parse_sites(s: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(|v| v.trim().parse::<i64>().map_err(|_| CliError::Usage(format!("cannot parse sites '{s}'"))))
        .collect()
}

fn parse_initial(bits: Option<&str>, ell: usize, through: i64) -> Result<SegmentState, CliError> {
    let Some(bits) = bits else {
        return Ok(SegmentState::new(vec![false; ell - 1], through));
    };
    if bits.len() != ell - 1 || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(CliError::Usage(format!("--initial needs {} bits of 0/1", ell - 1)));
    }
    Ok(SegmentState::new(bits.chars().map(|c| c == '1').collect(), through))
}

pub fn moments(a: &MomentsArgs) -> Result<Table, CliError> {
    if let Some(n) = a.n {
        if n != a.x.len() {
            return Err(CliError::Usage(format!("--n {n} does not match {} sites in --x", a.x.len())));
        }
    }
    let m = a.rates.model()?;
    m.require_formula()?;
    OrderedSites::halfline(a.x.clone())?;
    let quad = match a.nodes {
        Some(k) => QuadratureSpec::fixed(k)?,
        None => QuadratureSpec::auto(),
    };
    let n = a.x.len();
    let mut table = Table { columns: ["n", "t"].map(String::from).into_iter().chain(x_columns(n)).collect(), ..Table::default() };
    table.columns.extend(["value", "quad_err"].map(String::from));
    for &t in &a.t {
        let start = Instant::now();
        let r = v_n(t, &a.x, &m, &quad)?;
        let mut fields = vec![("n".to_string(), json!(n)), ("t".to_string(), json!(t))];
        fields.extend(x_columns(n).into_iter().zip(a.x.iter().map(|&v| json!(v))));
        fields.push(("value".into(), json!(r.value)));
        fields.push(("quad_err".into(), json!(r.quad_err)));
        let parts: Vec<Value> =
            r.per_partition.iter().map(|(l, v)| json!({ "partition": l.parts(), "value": v })).collect();
        for (l, v) in &r.per_partition {
            table.comments.push(format!("t={t} partition {:?} contributes {v}", l.parts()));
        }
        fields.push(("per_partition".into(), Value::Array(parts)));
        table.push(record(fields));
        table.nodes = r.nodes;
        log(&format!("moments t={t}"), start);
    }
    Ok(table)
}

pub fn simulate(a: &SimulateArgs) -> Result<Table, CliError> {
    let observables: Vec<Vec<i64>> = a.observables.iter().map(|s| parse_sites(s)).collect::<Result<_, _>>()?;
    let model = match a.model {
        SimKind::Halfline => SimModel::HalfLine(a.rates.model()?),
        SimKind::Segment => {
            let params = a.rates.segment(a.ell, a.rho_ell.as_deref())?;
            let initial = parse_initial(a.initial.as_deref(), params.ell(), 0)?;
            SimModel::Segment { params, initial }
        }
    };
    let start = Instant::now();
    let cfg = SimConfig {
        model,
        t_end: a.t,
        trajectories: a.trajectories,
        seed: a.seed,
        observables: observables.iter().map(|x| OrderedSites::raw(x.clone())).collect(),
    };
    let rep = estimate(&cfg)?;
    log(&format!("simulate {} trajectories", a.trajectories), start);
    let mut table = Table {
        columns: ["observable", "mean", "std_error", "trajectories", "seed"].map(String::from).to_vec(),
        ..Table::default()
    };
    for (x, e) in observables.iter().zip(&rep.estimates) {
        table.push(record(vec![
            ("observable".into(), json!(x)),
            ("mean".into(), json!(e.mean)),
            ("std_error".into(), json!(e.std_error)),
            ("trajectories".into(), json!(e.trajectories)),
            ("seed".into(), json!(a.seed)),
        ]));
    }
    Ok(table)
}

fn report_record(r: &DualityReport) -> Map<String, Value> {
    record(vec![
        ("check".into(), json!(r.check.to_string())),
        ("eta".into(), json!(r.eta)),
        ("through".into(), json!(r.through)),
        ("x".into(), json!(r.x)),
        ("lhs".into(), json!(r.lhs.to_string())),
        ("rhs".into(), json!(r.rhs.to_string())),
        ("residual".into(), json!(r.residual.to_string())),
        ("passed".into(), json!(r.passed())),
    ])
}

/// Records and the number of failed affirmative checks.
pub fn verify(a: &VerifyArgs) -> Result<(Vec<Map<String, Value>>, usize), CliError> {
    let start = Instant::now();
    let mut out = Vec::new();
    let mut failures = 0;
    let mut push = |r: &DualityReport, affirmative: bool| {
        if affirmative && !r.passed() {
            failures += 1;
        }
        let mut rec = report_record(r);
        rec.insert("affirmative".into(), json!(affirmative));
        out.push(rec);
    };
    let segment_mode = matches!(a.mode, VerifyMode::Segment) || (a.mode == VerifyMode::Fictitious && a.ell.is_some());
    if segment_mode {
        let s = a.rates.segment(a.ell, a.rho_ell.as_deref())?;
        let ell = s.ell() as i64;
        let xs = chambers_up_to(a.n_max.min(s.ell()), 1, ell);
        for &through in &a.through {
            for e in all_configurations(1, ell - 1, through) {
                for x in &xs {
                    let r = match a.mode {
                        VerifyMode::Segment => verify_segment(&s, &e, x)?,
                        _ => verify_fictitious_segment(&s, &e, x)?,
                    };
                    push(&r, true);
                }
            }
        }
    } else {
        let m = a.rates.model()?;
        let etas: Vec<Eta> = all_configurations(1, a.max_site, 0);
        let xs = chambers_up_to(a.n_max, 1, a.max_site);
        for e in &etas {
            for x in &xs {
                match a.mode {
                    VerifyMode::Fullspace => push(&verify_fullspace(&m, e, x)?, true),
                    VerifyMode::Halfline => push(&verify_halfline(&m, e, x)?, true),
                    VerifyMode::Fictitious => push(&verify_fictitious(&m, e, x)?, true),
                    VerifyMode::NoLiggett => {
                        let r = negative_control_no_liggett(&m, e, x)?;
                        // Away from the boundary the plain identity is affirmative; at x_1 = 1 only the corrected one is.
                        push(&r.plain, r.corrected.is_none());
                        if let Some(c) = &r.corrected {
                            push(c, true);
                        }
                    }
                    VerifyMode::Segment => unreachable!("handled above"),
                }
            }
        }
    }
    log(&format!("verify: {} checks, {failures} failures", out.len()), start);
    Ok((out, failures))
}

pub fn segment(a: &SegmentArgs) -> Result<Table, CliError> {
    let s = a.rates.segment(Some(a.ell), Some(&a.rho_ell))?;
    let initial = parse_initial(a.initial.as_deref(), a.ell, a.through)?;
    let start = Instant::now();
    let m = build_dual_matrix(&s, a.n)?;
    log(&format!("segment: dual matrix of dimension {}", m.dim()), start);
    let xs: Vec<Vec<i64>> = match &a.x {
        Some(x) => {
            if x.len() != a.n {
                return Err(CliError::Usage(format!("--x has {} sites but --n is {}", x.len(), a.n)));
            }
            OrderedSites::segment(x.clone(), a.ell)?;
            vec![x.clone()]
        }
        None => m.states().to_vec(),
    };
    let mut table = Table { columns: ["n", "t"].map(String::from).into_iter().chain(x_columns(a.n)).collect(), ..Table::default() };
    table.columns.extend(["value", "err"].map(String::from));
    table.nodes = vec![m.dim()];
    for &t in &a.t {
        let start = Instant::now();
        let sol = solve_with(&m, t, &initial, s.base().q())?;
        for x in &xs {
            let mut fields = vec![("n".to_string(), json!(a.n)), ("t".to_string(), json!(t))];
            fields.extend(x_columns(a.n).into_iter().zip(x.iter().map(|&v| json!(v))));
            fields.push(("value".into(), json!(sol.value(&m, x)?)));
            fields.push(("err".into(), json!(sol.error_estimate)));
            table.push(record(fields));
        }
        log(&format!("segment t={t}"), start);
    }
    Ok(table)
}

pub fn kpz(a: &KpzArgs) -> Result<Table, CliError> {
    let boundary = match (a.boundary, a.a) {
        (BoundaryKind::Robin, Some(v)) => Boundary::Robin { a: v },
        (BoundaryKind::Robin, None) => return Err(CliError::Usage("--A is required for the Robin boundary".into())),
        (BoundaryKind::Dirichlet, None) => Boundary::Dirichlet,
        (BoundaryKind::Dirichlet, Some(_)) => return Err(CliError::Usage("--A does not apply to the Dirichlet boundary".into())),
    };
    let k = KpzParams::new(boundary, a.t, a.x.clone())?;
    let n = a.x.len();
    let contours = ContourSpec::standard(n);
    let mut table = Table {
        columns: ["form", "eps", "n", "t"].map(String::from).into_iter().chain(x_columns(n)).collect(),
        ..Table::default()
    };
    table.columns.extend(["value", "quad_err"].map(String::from));
    let row = |form: &str, eps: Value, value: f64, err: f64| {
        let mut fields = vec![
            ("form".to_string(), json!(form)),
            ("eps".to_string(), eps),
            ("n".to_string(), json!(n)),
            ("t".to_string(), json!(a.t)),
        ];
        fields.extend(x_columns(n).into_iter().zip(a.x.iter().map(|&v| json!(v))));
        fields.push(("value".into(), json!(value)));
        fields.push(("quad_err".into(), json!(err)));
        record(fields)
    };
    let start = Instant::now();
    let r = match a.form {
        KpzForm::Nested => she_moment_nested(&k, &contours)?,
        KpzForm::Residue => she_moment_residue_form(&k, &contours)?,
    };
    let form = match a.form {
        KpzForm::Nested => "nested",
        KpzForm::Residue => "residue",
    };
    table.push(row(form, Value::Null, r.value, r.quad_err));
    table.nodes = r.nodes;
    log(&format!("kpz {form}"), start);
    for &eps in a.eps.iter().flatten() {
        let start = Instant::now();
        let b = scaled_asep_moment(eps, &k, &QuadratureSpec::auto())?;
        table.push(row("asep", json!(eps), b.value, b.quad_err));
        log(&format!("kpz bridge eps={eps}"), start);
    }
    Ok(table)
}
