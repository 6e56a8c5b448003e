//! Task execution and the report document.
//!
//! A report is assembled deterministically from the family file: tasks run
//! in file order (identical input bytes give identical report bytes), every
//! numeric result carries its method and certainty, and per-task failures
//! are embedded rather than aborting the run. Exact values print as
//! rationals or `c/sqrt(d1*d2)` triples; floats print with 12 significant
//! digits.

use crate::familyspec::{ArcSpec, FamilySpec, SpecError, Task, TaskSpec};
use serde::Serialize;
use std::collections::BTreeMap;
use vfold_core::arc::{eval_series, implicit_solve, Arc, ArcError};
use vfold_core::milnor::{
    default_degree_cap, milnor_local, milnor_weighted, mu_profile, Constancy, MilnorError,
    MilnorResult,
};
use vfold_core::poly::{Context, Monomial, Polynomial};
use vfold_core::series::TruncatedSeries;
use vfold_core::text::format_polynomial;
use vfold_core::transforms::{
    build_fold_transform, jacobian_det, verify_transported_kink, TransformError,
};
use vfold_core::whitney::{
    condition_a_along_arc, condition_bprime_along_arc, radius_search, vanishing_fold_test,
    LimitResult, PathFailure, RadiusSearchOptions, WhitneyError,
};
use vfold_core::BigRational;

/// Command-line overrides applied on top of the file's own settings.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub order: Option<u64>,
    pub cap: Option<usize>,
    pub budget: Option<usize>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStatus {
    AllDetermined,
    Undetermined,
    Errored,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub format: &'static str,
    pub family: FamilySummary,
    pub tasks: Vec<TaskReport>,
    pub notes: Vec<Note>,
}

#[derive(Debug, Serialize)]
pub struct FamilySummary {
    pub x: Vec<String>,
    pub t: Vec<String>,
    pub f: String,
    pub rho: String,
    pub weights: Option<String>,
    pub order: u64,
}

#[derive(Debug, Serialize)]
pub struct Note {
    pub task: usize,
    pub label: String,
    pub text: String,
}

#[derive(Debug, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub label: String,
    pub outcome: TaskOutcome,
}

#[derive(Debug, Serialize)]
pub struct MuEntry {
    pub sample: String,
    pub mu: u64,
    pub method: String,
    pub certificate_degree: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct SolvedUnit {
    pub unknown: String,
    pub initial: String,
    pub newton_steps: usize,
    pub series: String,
}

#[derive(Debug, Serialize)]
pub struct LimitEntry {
    pub parameter: Option<String>,
    pub verdict: String,
    pub numerator_valuation: String,
    pub doubled_numerator_valuation: Option<u64>,
    pub denominator_valuation_sum: Option<u64>,
    pub limit_exact: Option<String>,
    pub limit_float: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct GradientCheck {
    pub component: String,
    pub vanishes_to_order: u64,
}

#[derive(Debug, Serialize)]
pub struct CandidateEntry {
    pub point: Vec<String>,
    pub rho: String,
    pub residual: String,
    pub certified: bool,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskOutcome {
    MuWeighted {
        weights: String,
        mu: u64,
    },
    MuLocal {
        at: Vec<String>,
        mu: u64,
        method: String,
        certificate_degree: Option<usize>,
    },
    MuProfile {
        samples: Vec<String>,
        entries: Vec<MuEntry>,
        constancy: String,
    },
    Section {
        swap: Option<String>,
        substitution: String,
        section_family: String,
        samples: Vec<String>,
        entries: Vec<MuEntry>,
        constancy: String,
    },
    Whitney {
        arc: String,
        solved_unit: Option<SolvedUnit>,
        condition_a: Vec<LimitEntry>,
        condition_bprime: LimitEntry,
        secant_direction: Vec<String>,
        normal_direction: Vec<String>,
    },
    Fold {
        arc: String,
        is_fold: bool,
        failing_condition: Option<String>,
        multiplier: Option<String>,
    },
    Transform {
        arc: String,
        pivot_variable: String,
        determinant_one_to_order: u64,
        gradient_vanishing: Vec<GradientCheck>,
        radial_identity_order: u64,
        transport_order: u64,
        multiplier: String,
        multiplier_valuation: u64,
    },
    Radius {
        at: Vec<String>,
        epsilon: String,
        budget: usize,
        seed: u64,
        starts: usize,
        candidates: Vec<CandidateEntry>,
        note: String,
    },
    Undetermined {
        message: String,
    },
    Failed {
        message: String,
    },
}

/// Classified task failure: truncation-limited questions are separated
/// from genuine errors so the exit code can distinguish them.
#[derive(Debug)]
pub enum TaskFailure {
    Undetermined(String),
    Error(String),
}

impl From<WhitneyError> for TaskFailure {
    fn from(e: WhitneyError) -> Self {
        match e {
            WhitneyError::Undetermined { .. } => TaskFailure::Undetermined(e.to_string()),
            other => TaskFailure::Error(other.to_string()),
        }
    }
}

impl From<MilnorError> for TaskFailure {
    fn from(e: MilnorError) -> Self {
        match &e {
            MilnorError::CertificateNotReached { .. } => TaskFailure::Undetermined(e.to_string()),
            MilnorError::AtSample { source, .. }
                if matches!(**source, MilnorError::CertificateNotReached { .. }) =>
            {
                TaskFailure::Undetermined(e.to_string())
            }
            _ => TaskFailure::Error(e.to_string()),
        }
    }
}

impl From<TransformError> for TaskFailure {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::UndeterminedValuation { .. } => {
                TaskFailure::Undetermined(e.to_string())
            }
            other => TaskFailure::Error(other.to_string()),
        }
    }
}

impl From<ArcError> for TaskFailure {
    fn from(e: ArcError) -> Self {
        TaskFailure::Error(e.to_string())
    }
}

impl From<SpecError> for TaskFailure {
    fn from(e: SpecError) -> Self {
        TaskFailure::Error(e.to_string())
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.11e}")
}

fn fmt_rational(q: &BigRational) -> String {
    q.to_string()
}

fn limit_entry(parameter: Option<String>, result: &LimitResult) -> LimitEntry {
    let (doubled, den_sum) = match result.valuation_comparison() {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    LimitEntry {
        parameter,
        verdict: result.verdict.to_string(),
        numerator_valuation: result.numerator_valuation.to_string(),
        doubled_numerator_valuation: doubled,
        denominator_valuation_sum: den_sum,
        limit_exact: result.limit.as_ref().map(|l| l.to_string()),
        limit_float: result.float_approx.map(fmt_f64),
    }
}

fn mu_entries(samples: &[BigRational], results: &[MilnorResult]) -> Vec<MuEntry> {
    samples
        .iter()
        .zip(results.iter())
        .map(|(s, r)| MuEntry {
            sample: fmt_rational(s),
            mu: r.value,
            method: r.method.to_string(),
            certificate_degree: r.certificate.map(|c| c.degree),
        })
        .collect()
}

fn constancy_string(c: &Constancy) -> String {
    match c {
        Constancy::Constant => "constant".to_string(),
        Constancy::JumpAtZero { at_zero, generic } => {
            format!("jump at t = 0: mu = {at_zero} there, {generic} generically")
        }
        Constancy::Varying => "varying".to_string(),
    }
}

/// Arc realised as series, plus solver data when a unit was determined
/// from the zero-set equation.
pub struct BuiltArc {
    pub arc: Arc,
    pub solved: Option<SolvedUnit>,
}

/// Realise an arc description at the given truncation order. When the arc
/// declares an unknown unit `L`, the composition `F∘γ` is expanded as an
/// exact polynomial in `(L, s)`, the shared power of `s` is stripped, and
/// the resulting equation `G(L, s) = 0` is solved for `L(s)` by Newton
/// iteration from the declared initial value.
pub fn build_arc(
    spec: &FamilySpec,
    arc_spec: &ArcSpec,
    order: u64,
) -> Result<BuiltArc, TaskFailure> {
    let family_ctx = &spec.context;
    let (arc_ctx, unknown_index) = match &arc_spec.unknown {
        Some((name, _)) => (
            Context::new(vec![name.clone(), arc_spec.param.clone()], Vec::new())
                .map_err(|e| TaskFailure::Error(e.to_string()))?,
            Some(0usize),
        ),
        None => (
            Context::new(vec![arc_spec.param.clone()], Vec::new())
                .map_err(|e| TaskFailure::Error(e.to_string()))?,
            None,
        ),
    };
    let param_index = arc_ctx.index_of(&arc_spec.param).unwrap();

    // parse each declared component in family-variable order
    let mut component_polys: Vec<Polynomial> = Vec::new();
    for i in 0..family_ctx.var_count() {
        let name = family_ctx.name(i);
        let (_, text, line) = arc_spec
            .components
            .iter()
            .find(|(v, _, _)| v == name)
            .expect("validated at parse time");
        let poly = vfold_core::text::parse_polynomial(text, &arc_ctx).map_err(|source| {
            TaskFailure::Error(
                SpecError::Polynomial {
                    line: *line,
                    source,
                }
                .to_string(),
            )
        })?;
        component_polys.push(poly);
    }

    let mut solved = None;
    let assignment: Vec<TruncatedSeries> = match (&arc_spec.unknown, unknown_index) {
        (Some((name, initial)), Some(uidx)) => {
            let mut bindings = BTreeMap::new();
            for (i, poly) in component_polys.iter().enumerate() {
                bindings.insert(i, poly.clone());
            }
            let composed = spec
                .family
                .substitute(&bindings)
                .map_err(|e| TaskFailure::Error(e.to_string()))?;
            if composed.is_zero() {
                return Err(TaskFailure::Error(format!(
                    "arc `{}` lies in the zero set for every value of `{name}`; the unknown is unconstrained",
                    arc_spec.name
                )));
            }
            // strip the shared power of the parameter
            let shift = composed
                .terms()
                .map(|(m, _)| m.0[param_index])
                .min()
                .unwrap();
            let g = Polynomial::from_terms(
                &arc_ctx,
                composed.terms().map(|(m, c)| {
                    let mut e = m.0.clone();
                    e[param_index] -= shift;
                    (Monomial(e), c.clone())
                }),
            );
            let solution = implicit_solve(&g, uidx, param_index, initial, order)
                .map_err(|e| TaskFailure::Error(format!("solving for `{name}`: {e}")))?;
            solved = Some(SolvedUnit {
                unknown: name.clone(),
                initial: fmt_rational(initial),
                newton_steps: solution.newton_steps,
                series: solution.series.to_string(),
            });
            vec![solution.series, TruncatedSeries::identity(order)]
        }
        _ => {
            let max_deg = component_polys
                .iter()
                .filter_map(|p| p.total_degree())
                .max()
                .unwrap_or(0);
            vec![TruncatedSeries::identity(order.max(max_deg + 1))]
        }
    };

    let series: Vec<TruncatedSeries> = component_polys
        .iter()
        .map(|p| eval_series(p, &assignment))
        .collect();
    let n = family_ctx.x_count();
    let arc = Arc::new(
        family_ctx,
        series[..n].to_vec(),
        series[n..].to_vec(),
    )
    .map_err(TaskFailure::from)?;
    Ok(BuiltArc { arc, solved })
}

fn leading_direction(components: &[TruncatedSeries]) -> Vec<String> {
    let vmin = components.iter().filter_map(|c| c.valuation().value()).min();
    components
        .iter()
        .map(|c| match (vmin, c.valuation()) {
            (Some(v), vfold_core::series::Valuation::Finite { value, leading })
                if value == v =>
            {
                fmt_rational(&leading)
            }
            _ => "0".to_string(),
        })
        .collect()
}

fn specialize_at(
    spec: &FamilySpec,
    at: &[BigRational],
) -> Result<(Polynomial, Polynomial), TaskFailure> {
    if at.len() != spec.context.param_count() {
        return Err(TaskFailure::Error(format!(
            "`at` needs {} value(s), got {}",
            spec.context.param_count(),
            at.len()
        )));
    }
    let fibre = spec
        .family
        .specialize_parameters(at)
        .map_err(|e| TaskFailure::Error(e.to_string()))?;
    let rho = spec
        .rho
        .specialize_parameters(at)
        .map_err(|e| TaskFailure::Error(e.to_string()))?;
    Ok((fibre, rho))
}

fn run_task(spec: &FamilySpec, task: &TaskSpec, overrides: &Overrides) -> Result<TaskOutcome, TaskFailure> {
    let order = overrides.order.unwrap_or(spec.order);
    let weighted_guess = spec
        .weights
        .as_ref()
        .and_then(|w| milnor_weighted(w).ok());
    let cap_default = default_degree_cap(weighted_guess);
    match task {
        TaskSpec::MuWeighted => {
            let w = spec.weights.as_ref().ok_or_else(|| {
                TaskFailure::Error("no weight system declared in [family]".to_string())
            })?;
            let mu = milnor_weighted(w).map_err(TaskFailure::from)?;
            Ok(TaskOutcome::MuWeighted {
                weights: w.to_string(),
                mu,
            })
        }
        TaskSpec::MuLocal { at, cap } => {
            let (fibre, _) = specialize_at(spec, at)?;
            let cap = overrides.cap.or(*cap).unwrap_or(cap_default);
            let result = milnor_local(&fibre, cap).map_err(TaskFailure::from)?;
            Ok(TaskOutcome::MuLocal {
                at: at.iter().map(fmt_rational).collect(),
                mu: result.value,
                method: result.method.to_string(),
                certificate_degree: result.certificate.map(|c| c.degree),
            })
        }
        TaskSpec::MuProfile { samples, cap } => {
            let cap = overrides.cap.or(*cap).unwrap_or(cap_default);
            let profile = mu_profile(&spec.family, samples, cap, spec.weights.as_ref())
                .map_err(TaskFailure::from)?;
            Ok(TaskOutcome::MuProfile {
                samples: samples.iter().map(fmt_rational).collect(),
                entries: mu_entries(samples, &profile.results),
                constancy: constancy_string(&profile.constancy),
            })
        }
        TaskSpec::Section {
            eliminated,
            expression,
            swap,
            samples,
            cap,
        } => {
            let mut family = spec.family.clone();
            if let Some((a, b)) = swap {
                let ia = spec.context.index_of(a).ok_or_else(|| {
                    TaskFailure::Error(format!("unknown variable `{a}` in swap"))
                })?;
                let ib = spec.context.index_of(b).ok_or_else(|| {
                    TaskFailure::Error(format!("unknown variable `{b}` in swap"))
                })?;
                if spec.context.is_param(ia) || spec.context.is_param(ib) {
                    return Err(TaskFailure::Error(
                        "swap must exchange two x-variables".to_string(),
                    ));
                }
                family = family.swap_variables(ia, ib);
            }
            let elim_index = spec.context.index_of(eliminated).ok_or_else(|| {
                TaskFailure::Error(format!("unknown variable `{eliminated}` in section"))
            })?;
            if spec.context.is_param(elim_index) {
                return Err(TaskFailure::Error(format!(
                    "section must eliminate an x-variable, `{eliminated}` is a parameter"
                )));
            }
            let section_x: Vec<String> = spec
                .x_names
                .iter()
                .filter(|n| *n != eliminated)
                .cloned()
                .collect();
            let section_ctx = Context::new(section_x, spec.t_names.clone())
                .map_err(|e| TaskFailure::Error(e.to_string()))?;
            let expr = vfold_core::text::parse_polynomial(expression, &section_ctx)
                .map_err(|e| TaskFailure::Error(e.to_string()))?;
            let mut bindings = BTreeMap::new();
            bindings.insert(elim_index, expr);
            let section_family = family
                .substitute(&bindings)
                .map_err(|e| TaskFailure::Error(e.to_string()))?;
            let cap = overrides.cap.or(*cap).unwrap_or(cap_default);
            let profile =
                mu_profile(&section_family, samples, cap, None).map_err(TaskFailure::from)?;
            Ok(TaskOutcome::Section {
                swap: swap.as_ref().map(|(a, b)| format!("{a} <-> {b}")),
                substitution: format!("{eliminated} = {expression}"),
                section_family: format_polynomial(&section_family),
                samples: samples.iter().map(fmt_rational).collect(),
                entries: mu_entries(samples, &profile.results),
                constancy: constancy_string(&profile.constancy),
            })
        }
        TaskSpec::Whitney { arc } => {
            let arc_spec = spec
                .arc(arc)
                .ok_or_else(|| TaskFailure::Error(format!("no arc named `{arc}`")))?;
            let built = build_arc(spec, arc_spec, order)?;
            let a = condition_a_along_arc(&spec.family, &built.arc).map_err(TaskFailure::from)?;
            let b =
                condition_bprime_along_arc(&spec.family, &built.arc).map_err(TaskFailure::from)?;
            let n = spec.context.x_count();
            let grad: Vec<TruncatedSeries> = (0..n)
                .map(|i| {
                    vfold_core::arc::evaluate_along_arc(
                        &spec.family.partial_derivative(i),
                        &built.arc,
                    )
                })
                .collect::<Result<_, _>>()
                .map_err(|e: ArcError| TaskFailure::from(e))?;
            Ok(TaskOutcome::Whitney {
                arc: arc.clone(),
                solved_unit: built.solved,
                condition_a: a
                    .iter()
                    .enumerate()
                    .map(|(j, r)| limit_entry(Some(spec.t_names[j].clone()), r))
                    .collect(),
                condition_bprime: limit_entry(None, &b),
                secant_direction: leading_direction(built.arc.x_components()),
                normal_direction: leading_direction(&grad),
            })
        }
        TaskSpec::Fold { arc } => {
            let arc_spec = spec
                .arc(arc)
                .ok_or_else(|| TaskFailure::Error(format!("no arc named `{arc}`")))?;
            let built = build_arc(spec, arc_spec, order)?;
            let verdict =
                vanishing_fold_test(std::slice::from_ref(&spec.family), &spec.rho, &built.arc)
                    .map_err(TaskFailure::from)?;
            Ok(TaskOutcome::Fold {
                arc: arc.clone(),
                is_fold: verdict.is_fold,
                failing_condition: verdict.failing.map(|f| match f {
                    PathFailure::LeavesZeroSet { component } => {
                        format!("path condition 3: component #{} leaves the zero set", component + 1)
                    }
                    PathFailure::KinkFails { witness_minor } => {
                        let cols: Vec<String> = witness_minor
                            .iter()
                            .map(|&c| spec.x_names[c].clone())
                            .collect();
                        format!(
                            "kink condition: the ({}) minor is nonzero along the arc",
                            cols.join(",")
                        )
                    }
                }),
                multiplier: verdict.multiplier.map(|m| m.to_string()),
            })
        }
        TaskSpec::Transform { arc } => {
            let arc_spec = spec
                .arc(arc)
                .ok_or_else(|| TaskFailure::Error(format!("no arc named `{arc}`")))?;
            let built = build_arc(spec, arc_spec, order)?;
            let n = spec.context.x_count();
            let p: Vec<TruncatedSeries> = built.arc.x_components().to_vec();
            let q: Vec<TruncatedSeries> = (0..n)
                .map(|i| {
                    vfold_core::arc::evaluate_along_arc(
                        &spec.family.partial_derivative(i),
                        &built.arc,
                    )
                })
                .collect::<Result<_, _>>()
                .map_err(|e: ArcError| TaskFailure::from(e))?;
            let mut u = TruncatedSeries::zero(built.arc.order());
            for (pi, qi) in p.iter().zip(q.iter()) {
                u = u.add(&pi.mul(qi));
            }
            let ft = build_fold_transform(&p, &q, &u, built.arc.t_components())
                .map_err(TaskFailure::from)?;
            let det = jacobian_det(&ft.map);
            let unit = Monomial::unit(ft.map.context().var_count());
            let mut det_ok = true;
            for (m, s) in det.terms() {
                let is_one = *m == unit
                    && s.coeff(0) == Some(BigRational::from_integer(1.into()))
                    && s.coefficients().count() == 1;
                if !is_one {
                    det_ok = false;
                }
            }
            if !det_ok {
                return Err(TaskFailure::Error(
                    "Jacobian determinant is not identically 1".to_string(),
                ));
            }
            let record = verify_transported_kink(&spec.family, &ft).map_err(TaskFailure::from)?;
            Ok(TaskOutcome::Transform {
                arc: arc.clone(),
                pivot_variable: spec.x_names[ft.pivot].clone(),
                determinant_one_to_order: det.order(),
                gradient_vanishing: record
                    .vanishing_orders
                    .iter()
                    .map(|&(i, o)| GradientCheck {
                        component: spec.x_names[i].clone(),
                        vanishes_to_order: o,
                    })
                    .collect(),
                radial_identity_order: record.radial_order,
                transport_order: record.transport_order,
                multiplier: record.multiplier.to_string(),
                multiplier_valuation: record
                    .multiplier
                    .valuation()
                    .value()
                    .unwrap_or_default(),
            })
        }
        TaskSpec::Radius {
            at,
            epsilon,
            budget,
            seed,
        } => {
            let (fibre, rho) = specialize_at(spec, at)?;
            let mut opts = RadiusSearchOptions::new(overrides.epsilon.unwrap_or(*epsilon));
            opts.budget = overrides.budget.or(*budget).unwrap_or(opts.budget);
            opts.seed = overrides.seed.or(*seed).unwrap_or(opts.seed);
            let outcome =
                radius_search(std::slice::from_ref(&fibre), &rho, &opts).map_err(TaskFailure::from)?;
            Ok(TaskOutcome::Radius {
                at: at.iter().map(fmt_rational).collect(),
                epsilon: fmt_f64(opts.epsilon),
                budget: opts.budget,
                seed: opts.seed,
                starts: outcome.starts,
                candidates: outcome
                    .candidates
                    .iter()
                    .map(|c| CandidateEntry {
                        point: c.point.iter().map(|&v| fmt_f64(v)).collect(),
                        rho: fmt_f64(c.rho),
                        residual: fmt_f64(c.residual),
                        certified: c.certified,
                    })
                    .collect(),
                note: outcome.note.clone(),
            })
        }
    }
}

/// Run a list of tasks (defaulting to the file's own list) and assemble
/// the report document.
pub fn run_report_filtered(
    spec: &FamilySpec,
    tasks: &[Task],
    overrides: &Overrides,
) -> Report {
    let mut reports = Vec::with_capacity(tasks.len());
    let mut notes = Vec::new();
    for (index, task) in tasks.iter().enumerate() {
        let label = task.spec.kind().to_string();
        let outcome = match run_task(spec, &task.spec, overrides) {
            Ok(outcome) => outcome,
            Err(TaskFailure::Undetermined(message)) => TaskOutcome::Undetermined { message },
            Err(TaskFailure::Error(message)) => TaskOutcome::Failed { message },
        };
        if let Some(text) = &task.note {
            notes.push(Note {
                task: index + 1,
                label: label.clone(),
                text: text.clone(),
            });
        }
        reports.push(TaskReport {
            index: index + 1,
            label,
            outcome,
        });
    }
    Report {
        format: "vfold-report 1",
        family: FamilySummary {
            x: spec.x_names.clone(),
            t: spec.t_names.clone(),
            f: format_polynomial(&spec.family),
            rho: spec.rho_text.clone(),
            weights: spec.weights.as_ref().map(|w| w.to_string()),
            order: overrides.order.unwrap_or(spec.order),
        },
        tasks: reports,
        notes,
    }
}

pub fn run_report(spec: &FamilySpec, overrides: &Overrides) -> Report {
    run_report_filtered(spec, &spec.tasks, overrides)
}

impl Report {
    pub fn status(&self) -> ReportStatus {
        let mut undetermined = false;
        for task in &self.tasks {
            match &task.outcome {
                TaskOutcome::Failed { .. } => return ReportStatus::Errored,
                TaskOutcome::Undetermined { .. } => undetermined = true,
                TaskOutcome::Whitney {
                    condition_a,
                    condition_bprime,
                    ..
                }
                    if condition_a
                        .iter()
                        .chain(std::iter::once(condition_bprime))
                        .any(|e| e.verdict == "undetermined")
                    => {
                        undetermined = true;
                    }
                _ => {}
            }
        }
        if undetermined {
            ReportStatus::Undetermined
        } else {
            ReportStatus::AllDetermined
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: &str| {
            out.push_str(line);
            out.push('\n');
        };
        push(&mut out, self.format);
        push(
            &mut out,
            &format!(
                "family: F = {}   [x = {}; t = {}]",
                self.family.f,
                self.family.x.join(", "),
                if self.family.t.is_empty() {
                    "-".to_string()
                } else {
                    self.family.t.join(", ")
                }
            ),
        );
        push(&mut out, &format!("control: rho = {}", self.family.rho));
        if let Some(w) = &self.family.weights {
            push(&mut out, &format!("weights: {w}"));
        }
        push(&mut out, &format!("order: {}", self.family.order));
        for task in &self.tasks {
            push(&mut out, "");
            push(&mut out, &format!("[{}] {}", task.index, task.label));
            match &task.outcome {
                TaskOutcome::MuWeighted { weights, mu } => {
                    push(&mut out, &format!("  mu = {mu}   (weighted formula, type {weights})"));
                }
                TaskOutcome::MuLocal {
                    at,
                    mu,
                    method,
                    certificate_degree,
                } => {
                    let cert = certificate_degree
                        .map(|d| format!(", Nakayama certificate at degree {d}"))
                        .unwrap_or_default();
                    push(
                        &mut out,
                        &format!(
                            "  algebraic Milnor number at t = ({}): mu = {mu}   ({method}{cert})",
                            at.join(", ")
                        ),
                    );
                }
                TaskOutcome::MuProfile {
                    entries, constancy, ..
                } => {
                    for e in entries {
                        let cert = e
                            .certificate_degree
                            .map(|d| format!(", certificate at degree {d}"))
                            .unwrap_or_default();
                        push(
                            &mut out,
                            &format!("  t = {}: mu = {}   ({}{cert})", e.sample, e.mu, e.method),
                        );
                    }
                    push(&mut out, &format!("  profile: {constancy}"));
                }
                TaskOutcome::Section {
                    swap,
                    substitution,
                    section_family,
                    entries,
                    constancy,
                    ..
                } => {
                    if let Some(s) = swap {
                        push(&mut out, &format!("  variable roles exchanged: {s}"));
                    }
                    push(&mut out, &format!("  hyperplane section: {substitution}"));
                    push(&mut out, &format!("  section family: {section_family}"));
                    for e in entries {
                        let cert = e
                            .certificate_degree
                            .map(|d| format!(", certificate at degree {d}"))
                            .unwrap_or_default();
                        push(
                            &mut out,
                            &format!(
                                "  t = {}: algebraic mu = {}   ({}{cert})",
                                e.sample, e.mu, e.method
                            ),
                        );
                    }
                    push(&mut out, &format!("  profile: {constancy}"));
                }
                TaskOutcome::Whitney {
                    arc,
                    solved_unit,
                    condition_a,
                    condition_bprime,
                    secant_direction,
                    normal_direction,
                } => {
                    push(&mut out, &format!("  along arc `{arc}`"));
                    if let Some(u) = solved_unit {
                        push(
                            &mut out,
                            &format!(
                                "  solved unit {}(s) = {}   ({} Newton step(s) from {}(0) = {})",
                                u.unknown, u.series, u.newton_steps, u.unknown, u.initial
                            ),
                        );
                    }
                    for e in condition_a {
                        let cmp = match (e.doubled_numerator_valuation, e.denominator_valuation_sum)
                        {
                            (Some(a), Some(b)) => format!("   [2v(num) = {a} vs v(den^2) = {b}]"),
                            _ => String::new(),
                        };
                        push(
                            &mut out,
                            &format!(
                                "  condition (a) for {}: {}{}{}",
                                e.parameter.as_deref().unwrap_or("t"),
                                e.verdict,
                                e.limit_exact
                                    .as_ref()
                                    .map(|l| format!(", limit {l}"))
                                    .unwrap_or_default(),
                                cmp
                            ),
                        );
                    }
                    let e = condition_bprime;
                    let cmp = match (e.doubled_numerator_valuation, e.denominator_valuation_sum) {
                        (Some(a), Some(b)) => format!("   [2v(num) = {a} vs v(den^2) = {b}]"),
                        _ => String::new(),
                    };
                    push(
                        &mut out,
                        &format!(
                            "  condition (b'): {}{}{}{}",
                            e.verdict,
                            e.limit_exact
                                .as_ref()
                                .map(|l| format!(", limit {l}"))
                                .unwrap_or_default(),
                            e.limit_float
                                .as_ref()
                                .map(|f| format!(" ~ {f}"))
                                .unwrap_or_default(),
                            cmp
                        ),
                    );
                    push(
                        &mut out,
                        &format!("  secant direction: ({})", secant_direction.join(" : ")),
                    );
                    push(
                        &mut out,
                        &format!("  normal direction: ({})", normal_direction.join(" : ")),
                    );
                }
                TaskOutcome::Fold {
                    arc,
                    is_fold,
                    failing_condition,
                    multiplier,
                } => {
                    if *is_fold {
                        push(&mut out, &format!("  arc `{arc}` IS a rho-vanishing fold"));
                        if let Some(m) = multiplier {
                            push(&mut out, &format!("  kink multiplier lambda(s) = {m}"));
                        }
                    } else {
                        push(&mut out, &format!("  arc `{arc}` is NOT a vanishing fold"));
                        if let Some(f) = failing_condition {
                            push(&mut out, &format!("  failing: {f}"));
                        }
                    }
                }
                TaskOutcome::Transform {
                    arc,
                    pivot_variable,
                    determinant_one_to_order,
                    gradient_vanishing,
                    radial_identity_order,
                    transport_order,
                    multiplier,
                    multiplier_valuation,
                } => {
                    push(
                        &mut out,
                        &format!("  fold transform built from arc `{arc}` (pivot {pivot_variable})"),
                    );
                    push(
                        &mut out,
                        &format!(
                            "  det(dPsi/dy) = 1 identically to order {determinant_one_to_order}"
                        ),
                    );
                    for g in gradient_vanishing {
                        push(
                            &mut out,
                            &format!(
                                "  d(F∘Phi)/d{} = 0 along the axis to order {}",
                                g.component, g.vanishes_to_order
                            ),
                        );
                    }
                    push(
                        &mut out,
                        &format!(
                            "  pivot gradient component = u/p1 to order {radial_identity_order}"
                        ),
                    );
                    push(
                        &mut out,
                        &format!("  Phi(p1(tau), 0, ..., tau) = gamma(tau) to order {transport_order}"),
                    );
                    push(
                        &mut out,
                        &format!(
                            "  kink multiplier u/p1^2 = {multiplier}   (valuation {multiplier_valuation})"
                        ),
                    );
                }
                TaskOutcome::Radius {
                    epsilon,
                    budget,
                    seed,
                    candidates,
                    note,
                    at,
                    ..
                } => {
                    push(
                        &mut out,
                        &format!(
                            "  numeric search at t = ({}), epsilon = {epsilon}, budget = {budget}, seed = {seed}",
                            at.join(", ")
                        ),
                    );
                    for c in candidates {
                        push(
                            &mut out,
                            &format!(
                                "  candidate ({}) with rho = {}, residual = {}  [non-certified]",
                                c.point.join(", "),
                                c.rho,
                                c.residual
                            ),
                        );
                    }
                    push(&mut out, &format!("  {note}"));
                }
                TaskOutcome::Undetermined { message } => {
                    push(&mut out, &format!("  UNDETERMINED: {message}"));
                }
                TaskOutcome::Failed { message } => {
                    push(&mut out, &format!("  ERROR: {message}"));
                }
            }
        }
        if !self.notes.is_empty() {
            push(&mut out, "");
            push(&mut out, "notes:");
            for n in &self.notes {
                push(&mut out, &format!("  [{}] {}: {}", n.task, n.label, n.text));
            }
        }
        out
    }
}
