//! Time evolution through piecewise-constant schedules.
//!
//! Segments without collapse operators are propagated exactly through the
//! Hermitian eigendecomposition of their Hamiltonian. Segments with collapse
//! operators integrate the Lindblad master equation
//!
//! ```text
//! dρ/dt = -i[H, ρ] + Σ_j (L_j ρ L_j† − ½{L_j† L_j, ρ})
//! ```
//!
//! with fixed-step RK4. The Hamiltonians and dephasing operators produced
//! by this crate have a handful of nonzeros per row, so the right-hand side
//! only ever multiplies a sparse operator into a dense matrix.

use crate::error::{Error, Result};
use crate::operators::{
    embed, spin_ops, Factor, HilbertLayout, Matrix, Operator, OperatorKind, QuantumState, Spectrum,
    StateData, C64, I, ZERO,
};

/// Default RK4 step bound (s).
pub const DEFAULT_DT_MAX: f64 = 10e-9;

/// Times closer than this (s) are treated as equal when splitting schedules.
pub const TIME_EPS: f64 = 1e-12;

const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Decoherence and state-preparation imperfections.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct NoiseModel {
    /// Dephasing rate γ_c (rad/s) while a carrier drive is on.
    pub dephasing_carrier: f64,
    /// Dephasing rate γ_s (rad/s) while a sideband drive is on.
    pub dephasing_sideband: f64,
    /// Probability ε that a preparation or mapping pulse does nothing.
    pub prep_infidelity: f64,
    /// Mean thermal occupation n̄ of every mode at the start.
    pub thermal_occupation: f64,
}

impl NoiseModel {
    pub fn ideal() -> Self {
        NoiseModel::default()
    }

    pub fn is_ideal(&self) -> bool {
        *self == NoiseModel::default()
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("dephasing_carrier", self.dephasing_carrier),
            ("dephasing_sideband", self.dephasing_sideband),
            ("thermal_occupation", self.thermal_occupation),
        ];
        for (name, v) in rates {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.prep_infidelity) {
            return Err(Error::InvalidParameter(format!(
                "prep_infidelity = {} outside [0, 1]",
                self.prep_infidelity
            )));
        }
        Ok(())
    }
}

/// One piece of a schedule.
#[derive(Clone, Debug)]
pub enum Segment {
    /// Constant Hamiltonian for `duration` seconds, optionally dissipative.
    Evolve {
        hamiltonian: Operator,
        duration: f64,
        collapse_ops: Vec<Operator>,
        label: String,
    },
    /// Instantaneous unitary.
    Unitary { unitary: Operator, label: String },
}

impl Segment {
    pub fn evolve(hamiltonian: Operator, duration: f64, label: impl Into<String>) -> Self {
        Segment::Evolve {
            hamiltonian,
            duration,
            collapse_ops: Vec::new(),
            label: label.into(),
        }
    }

    pub fn dissipative(
        hamiltonian: Operator,
        duration: f64,
        collapse_ops: Vec<Operator>,
        label: impl Into<String>,
    ) -> Self {
        Segment::Evolve {
            hamiltonian,
            duration,
            collapse_ops,
            label: label.into(),
        }
    }

    pub fn unitary(unitary: Operator, label: impl Into<String>) -> Self {
        Segment::Unitary {
            unitary,
            label: label.into(),
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            Segment::Evolve { duration, .. } => *duration,
            Segment::Unitary { .. } => 0.0,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Segment::Evolve { label, .. } | Segment::Unitary { label, .. } => label,
        }
    }

    pub fn has_collapse_ops(&self) -> bool {
        matches!(self, Segment::Evolve { collapse_ops, .. } if !collapse_ops.is_empty())
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Segment::Evolve {
                hamiltonian,
                duration,
                collapse_ops,
                ..
            } => {
                if !(*duration >= 0.0 && duration.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "segment `{}` duration {duration}",
                        self.label()
                    )));
                }
                if hamiltonian.kind() != OperatorKind::Hermitian {
                    return Err(Error::NotHermitian(crate::operators::hermitian_deviation(
                        hamiltonian.matrix(),
                    )));
                }
                for op in std::iter::once(hamiltonian).chain(collapse_ops) {
                    if op.dim() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: op.dim(),
                        });
                    }
                }
            }
            Segment::Unitary { unitary, .. } => {
                if unitary.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: unitary.dim(),
                    });
                }
                if !unitary.is_unitary() {
                    return Err(Error::NotUnitary(crate::operators::unitary_deviation(
                        unitary.matrix(),
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Pure spin dephasing `L = √(γ/2) σ_z` on one ion; empty when γ = 0.
///
/// Off-diagonal spin coherences decay as `e^{-γt}` under this operator.
pub fn dephasing_ops(ion: usize, rate: f64, layout: &HilbertLayout) -> Result<Vec<Operator>> {
    if rate == 0.0 {
        return Ok(Vec::new());
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("dephasing rate {rate}")));
    }
    Ok(vec![embed(&spin_ops().z, ion, Factor::Spin, layout)?.scaled((rate / 2.0).sqrt())])
}

/// Thermal occupation probabilities over `d` Fock levels, renormalized
/// after truncation.
pub fn thermal_distribution(nbar: f64, d: usize) -> Vec<f64> {
    if nbar <= 0.0 {
        let mut p = vec![0.0; d];
        p[0] = 1.0;
        return p;
    }
    let ratio = nbar / (1.0 + nbar);
    let raw: Vec<f64> = (0..d).map(|n| ratio.powi(n as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// Every spin down, every mode in a truncated thermal state of mean `nbar`.
pub fn thermal_ground_state(layout: HilbertLayout, nbar: f64) -> Result<QuantumState> {
    if nbar == 0.0 {
        return QuantumState::fock(layout, &vec![0; layout.n_ions()]);
    }
    let p = thermal_distribution(nbar, layout.fock_cutoff());
    let dim = layout.dim();
    let mut rho = Matrix::zeros(dim, dim);
    for i in 0..dim {
        let (spins, phonons) = layout.decode(i);
        if spins.iter().any(|s| *s != crate::operators::Spin::Down) {
            continue;
        }
        rho[(i, i)] = C64::from(phonons.iter().map(|&n| p[n]).product::<f64>());
    }
    QuantumState::density(layout, rho)
}

/// Convex combination `Σ w_i ρ_i`; weights must sum to 1.
pub fn mix(parts: &[(f64, QuantumState)]) -> Result<QuantumState> {
    let (_, first) = parts
        .first()
        .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
    let layout = *first.layout();
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-12 || parts.iter().any(|(w, _)| *w < 0.0) {
        return Err(Error::InvalidState(format!("mixture weights sum to {total}")));
    }
    let mut rho = Matrix::zeros(layout.dim(), layout.dim());
    for (w, s) in parts {
        if *s.layout() != layout {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: s.layout().dim(),
            });
        }
        rho += s.density_matrix() * C64::from(*w);
    }
    Ok(QuantumState::from_data(layout, StateData::Density(rho)))
}

/// Row-wise sparse copy of a dense operator.
#[derive(Clone, Debug)]
struct SparseRows {
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    fn new(m: &Matrix) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter_map(|j| {
                        let v = m[(i, j)];
                        (v != ZERO).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        SparseRows { rows }
    }

    /// `self · m`
    fn mul(&self, m: &Matrix) -> Matrix {
        let n = m.ncols();
        let mut out = Matrix::zeros(self.rows.len(), n);
        for c in 0..n {
            let col = m.column(c);
            for (i, row) in self.rows.iter().enumerate() {
                let mut acc = ZERO;
                for &(k, v) in row {
                    acc += v * col[k];
                }
                out[(i, c)] = acc;
            }
        }
        out
    }
}

struct Dissipator {
    l: SparseRows,
    l_dag: SparseRows,
    l_dag_l: SparseRows,
}

/// Lindblad generator in Schrödinger and Heisenberg form. Both assume a
/// Hermitian argument, which every state and observable here is.
struct Lindbladian {
    h: SparseRows,
    dissipators: Vec<Dissipator>,
}

impl Lindbladian {
    fn new(h: &Operator, collapse_ops: &[Operator]) -> Self {
        let dissipators = collapse_ops
            .iter()
            .map(|l| {
                let m = l.matrix();
                Dissipator {
                    l: SparseRows::new(m),
                    l_dag: SparseRows::new(&m.adjoint()),
                    l_dag_l: SparseRows::new(&(m.adjoint() * m)),
                }
            })
            .collect();
        Lindbladian {
            h: SparseRows::new(h.matrix()),
            dissipators,
        }
    }

    fn apply(&self, rho: &Matrix) -> Matrix {
        // ρH = (Hρ)† for Hermitian ρ
        let hr = self.h.mul(rho);
        let mut out = (&hr - hr.adjoint()) * (-I);
        for d in &self.dissipators {
            let x = d.l.mul(rho);
            out += d.l.mul(&x.adjoint());
            let mr = d.l_dag_l.mul(rho);
            out -= (&mr + mr.adjoint()) * C64::from(0.5);
        }
        out
    }

    fn apply_adjoint(&self, obs: &Matrix) -> Matrix {
        let ho = self.h.mul(obs);
        let mut out = (&ho - ho.adjoint()) * I;
        for d in &self.dissipators {
            let x = d.l_dag.mul(obs);
            out += d.l_dag.mul(&x.adjoint());
            let mo = d.l_dag_l.mul(obs);
            out -= (&mo + mo.adjoint()) * C64::from(0.5);
        }
        out
    }
}

fn hermitize(m: &mut Matrix) {
    let adj = m.adjoint();
    *m += adj;
    *m *= C64::from(0.5);
}

/// Fixed-step RK4 of `dx/dt = f(x)` over `duration` with steps ≤ `dt_max`.
fn rk4(x: &Matrix, duration: f64, dt_max: f64, f: impl Fn(&Matrix) -> Matrix) -> Matrix {
    if duration <= 0.0 {
        return x.clone();
    }
    let steps = (duration / dt_max - 1e-9).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let half = C64::from(h / 2.0);
    let full = C64::from(h);
    let sixth = C64::from(h / 6.0);
    let two = C64::from(2.0);
    let mut x = x.clone();
    for _ in 0..steps {
        let k1 = f(&x);
        let k2 = f(&(&x + &k1 * half));
        let k3 = f(&(&x + &k2 * half));
        let k4 = f(&(&x + &k3 * full));
        x += (k1 + (k2 + k3) * two + k4) * sixth;
        hermitize(&mut x);
    }
    x
}

fn check_dt(dt_max: f64) -> Result<()> {
    if !(dt_max > 0.0 && dt_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt_max = {dt_max}")));
    }
    Ok(())
}

/// `|ψ⟩ → exp(-iHT)|ψ⟩`, or `U|ψ⟩` for an instantaneous segment.
pub fn evolve_pure(state: &QuantumState, segment: &Segment) -> Result<QuantumState> {
    let psi = state
        .as_pure()
        .ok_or_else(|| Error::InvalidState("evolve_pure needs a pure state".into()))?;
    segment.validate(state.layout().dim())?;
    if segment.has_collapse_ops() {
        return Err(Error::CollapseOpsPresent(segment.label().to_string()));
    }
    let u = match segment {
        Segment::Evolve {
            hamiltonian,
            duration,
            ..
        } => {
            if *duration == 0.0 {
                return Ok(state.clone());
            }
            Spectrum::new(hamiltonian)?.propagator(*duration)
        }
        Segment::Unitary { unitary, .. } => unitary.clone(),
    };
    Ok(QuantumState::from_data(
        *state.layout(),
        StateData::Pure(u.matrix() * psi),
    ))
}

/// Integrate the master equation over one segment with RK4 steps ≤ `dt_max`.
///
/// Instantaneous segments act as `UρU†`. Fails with an integration-accuracy
/// error when the trace drifts by more than 1e-6 or the state blows up.
pub fn evolve_lindblad(rho: &QuantumState, segment: &Segment, dt_max: f64) -> Result<QuantumState> {
    check_dt(dt_max)?;
    let m = match rho.data() {
        StateData::Density(m) => m,
        StateData::Pure(_) => return Err(Error::InvalidState("evolve_lindblad needs a density matrix".into())),
    };
    segment.validate(rho.layout().dim())?;
    let out = match segment {
        Segment::Unitary { unitary, .. } => conjugate(m, unitary.matrix()),
        Segment::Evolve {
            hamiltonian,
            duration,
            collapse_ops,
            ..
        } => {
            let gen = Lindbladian::new(hamiltonian, collapse_ops);
            rk4(m, *duration, dt_max, |x| gen.apply(x))
        }
    };
    check_accuracy(segment.label(), m, &out)?;
    Ok(QuantumState::from_data(*rho.layout(), StateData::Density(out)))
}

fn conjugate(rho: &Matrix, u: &Matrix) -> Matrix {
    let mut out = u * rho * u.adjoint();
    hermitize(&mut out);
    out
}

fn check_accuracy(label: &str, before: &Matrix, after: &Matrix) -> Result<()> {
    let tr0 = before.trace().re;
    let tr1 = after.trace().re;
    let fail = |detail: String| {
        Err(Error::IntegrationAccuracy {
            label: label.to_string(),
            detail,
        })
    };
    if after.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return fail("non-finite entries".into());
    }
    if (tr1 - tr0).abs() > TRACE_DRIFT_LIMIT {
        return fail(format!("trace drifted from {tr0} to {tr1}"));
    }
    let purity = crate::operators::trace_product(after, after).re;
    if purity > tr1 * tr1 + TRACE_DRIFT_LIMIT {
        return fail(format!("purity {purity} exceeds 1"));
    }
    Ok(())
}

/// Evolve any state through one segment, promoting pure states to density
/// matrices when the segment is dissipative.
pub fn evolve(state: &QuantumState, segment: &Segment, dt_max: f64) -> Result<QuantumState> {
    match state.data() {
        StateData::Pure(_) if !segment.has_collapse_ops() => evolve_pure(state, segment),
        StateData::Pure(_) => evolve_lindblad(&state.to_density(), segment, dt_max),
        StateData::Density(_) => evolve_lindblad(state, segment, dt_max),
    }
}

/// Evolve an observable backwards through one segment (Heisenberg picture):
/// returns `O'` with `Tr(O' ρ) = Tr(O · E(ρ))` for the segment's channel `E`.
pub fn evolve_observable(obs: &Matrix, segment: &Segment, dt_max: f64) -> Result<Matrix> {
    check_dt(dt_max)?;
    segment.validate(obs.nrows())?;
    Ok(match segment {
        Segment::Unitary { unitary, .. } => conjugate(obs, &unitary.matrix().adjoint()),
        Segment::Evolve {
            hamiltonian,
            duration,
            collapse_ops,
            ..
        } => {
            if collapse_ops.is_empty() {
                let u = Spectrum::new(hamiltonian)?.propagator(*duration);
                conjugate(obs, &u.matrix().adjoint())
            } else {
                let gen = Lindbladian::new(hamiltonian, collapse_ops);
                rk4(obs, *duration, dt_max, |x| gen.apply_adjoint(x))
            }
        }
    })
}

/// Stepper for one segment that can advance by arbitrary sub-intervals.
enum Stepper {
    Exact(Spectrum),
    Dissipative(Lindbladian),
}

impl Stepper {
    fn new(segment: &Segment) -> Result<Option<Self>> {
        Ok(match segment {
            Segment::Unitary { .. } => None,
            Segment::Evolve {
                hamiltonian,
                collapse_ops,
                ..
            } => Some(if collapse_ops.is_empty() {
                Stepper::Exact(Spectrum::new(hamiltonian)?)
            } else {
                Stepper::Dissipative(Lindbladian::new(hamiltonian, collapse_ops))
            }),
        })
    }

    fn advance(&self, state: QuantumState, dt: f64, dt_max: f64, label: &str) -> Result<QuantumState> {
        if dt <= 0.0 {
            return Ok(state);
        }
        let layout = *state.layout();
        match self {
            Stepper::Exact(spec) => {
                let u = spec.propagator(dt);
                Ok(match state.data() {
                    StateData::Pure(psi) => QuantumState::from_data(layout, StateData::Pure(u.matrix() * psi)),
                    StateData::Density(rho) => {
                        QuantumState::from_data(layout, StateData::Density(conjugate(rho, u.matrix())))
                    }
                })
            }
            Stepper::Dissipative(gen) => {
                let rho = match state.data() {
                    StateData::Density(m) => m.clone(),
                    StateData::Pure(_) => state.density_matrix(),
                };
                let out = rk4(&rho, dt, dt_max, |x| gen.apply(x));
                check_accuracy(label, &rho, &out)?;
                Ok(QuantumState::from_data(layout, StateData::Density(out)))
            }
        }
    }
}

/// Run a schedule and return the state at each requested time.
///
/// Segments are split exactly at sample points. A sample coinciding with an
/// instantaneous segment sees the state after that segment.
pub fn run_schedule(
    initial: &QuantumState,
    segments: &[Segment],
    sample_times: &[f64],
    dt_max: f64,
) -> Result<Vec<QuantumState>> {
    check_dt(dt_max)?;
    let dim = initial.layout().dim();
    for s in segments {
        s.validate(dim)?;
    }
    let total: f64 = segments.iter().map(Segment::duration).sum();
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("sample times must be sorted".into()));
    }
    if let Some(&t) = sample_times.iter().find(|&&t| t < -TIME_EPS || t > total + TIME_EPS) {
        return Err(Error::SampleTimeOutOfRange { time: t, end: total });
    }

    let mut out = Vec::with_capacity(sample_times.len());
    let mut pending = sample_times.iter().copied().peekable();
    let mut state = initial.clone();
    let mut t0 = 0.0;

    for segment in segments {
        if let Segment::Unitary { .. } = segment {
            state = evolve(&state, segment, dt_max)?;
            continue;
        }
        let duration = segment.duration();
        if duration <= 0.0 {
            continue;
        }
        while let Some(&t) = pending.peek() {
            if t > t0 + TIME_EPS {
                break;
            }
            out.push(state.clone());
            pending.next();
        }
        let stepper = Stepper::new(segment)?.expect("evolve segment");
        let t1 = t0 + duration;
        let mut now = t0;
        while let Some(&t) = pending.peek() {
            if t >= t1 - TIME_EPS {
                break;
            }
            state = stepper.advance(state, t - now, dt_max, segment.label())?;
            now = t;
            out.push(state.clone());
            pending.next();
        }
        state = stepper.advance(state, t1 - now, dt_max, segment.label())?;
        t0 = t1;
    }
    for _ in pending {
        out.push(state.clone());
    }
    Ok(out)
}

/// Final state after the whole schedule.
pub fn run_to_end(initial: &QuantumState, segments: &[Segment], dt_max: f64) -> Result<QuantumState> {
    let mut state = initial.clone();
    for s in segments {
        state = evolve(&state, s, dt_max)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hopping, phase_shift_unitary, HoppingGraph};
    use crate::operators::{max_abs, phonon_projector, populations, Spin, Vector};
    use std::f64::consts::PI;

    const KAPPA: f64 = 2.0 * PI * 2.0e3;

    fn hop(d: usize) -> (HilbertLayout, Operator) {
        let l = HilbertLayout::new(2, d).unwrap();
        let h = build_hopping(&HoppingGraph::pair(KAPPA).unwrap(), &l).unwrap();
        (l, h)
    }

    #[test]
    fn zero_duration_is_identity() {
        let (l, h) = hop(3);
        let s = QuantumState::fock(l, &[1, 0]).unwrap();
        let out = evolve_pure(&s, &Segment::evolve(h, 0.0, "noop")).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn phase_flip_time_reverses_hopping() {
        let (l, h) = hop(3);
        let s = QuantumState::fock(l, &[1, 0]).unwrap();
        let segs = [
            Segment::evolve(h.clone(), 62.5e-6, "hop"),
            Segment::unitary(phase_shift_unitary(1, PI, &l).unwrap(), "flip"),
            Segment::evolve(h, 62.5e-6, "hop"),
        ];
        let out = run_to_end(&s, &segs, DEFAULT_DT_MAX).unwrap();
        let overlap = s.as_pure().unwrap().dotc(out.as_pure().unwrap()).norm_sqr();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_phonon_beamsplitter_point() {
        // κt/2 = π/4: P20 = cos⁴, P11 = 2 sin² cos², P02 = sin⁴
        let (l, h) = hop(4);
        let s = QuantumState::fock(l, &[2, 0]).unwrap();
        let out = evolve_pure(&s, &Segment::evolve(h, 125e-6, "hop")).unwrap();
        let projs: Vec<_> = [[2, 0], [1, 1], [0, 2]]
            .iter()
            .map(|n| phonon_projector(&l, n).unwrap())
            .collect();
        let p = populations(&out, &projs).unwrap();
        assert!((p[0] - 0.25).abs() < 1e-12);
        assert!((p[1] - 0.5).abs() < 1e-12);
        assert!((p[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn evolve_pure_rejects_collapse_ops() {
        let (l, h) = hop(2);
        let ops = dephasing_ops(0, 1e3, &l).unwrap();
        let seg = Segment::dissipative(h, 1e-6, ops, "noisy");
        let s = QuantumState::fock(l, &[1, 0]).unwrap();
        assert!(matches!(evolve_pure(&s, &seg), Err(Error::CollapseOpsPresent(_))));
    }

    #[test]
    fn lindblad_without_collapse_matches_unitary() {
        let (l, h) = hop(3);
        let s = QuantumState::fock(l, &[1, 0]).unwrap();
        let seg = Segment::evolve(h, 80e-6, "hop");
        let exact = evolve_pure(&s, &seg).unwrap().density_matrix();
        // force the RK4 path by attaching a zero-rate collapse operator
        let seg_rk = match seg {
            Segment::Evolve { hamiltonian, duration, .. } => Segment::dissipative(
                hamiltonian,
                duration,
                vec![Operator::zeros(l.dim())],
                "hop-rk4",
            ),
            _ => unreachable!(),
        };
        let rk = evolve_lindblad(&s.to_density(), &seg_rk, 100e-9).unwrap();
        assert!(max_abs(&(rk.density_matrix() - exact)) < 1e-8);
    }

    #[test]
    fn pure_dephasing_closed_form() {
        let l = HilbertLayout::new(1, 2).unwrap();
        let gamma = 2.0 * PI * 3e3;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = Vector::zeros(l.dim());
        psi[l.index(&[Spin::Down], &[0]).unwrap()] = C64::from(h);
        psi[l.index(&[Spin::Up], &[0]).unwrap()] = C64::from(h);
        let rho = QuantumState::pure(l, psi).unwrap().to_density();
        let seg = Segment::dissipative(Operator::zeros(l.dim()), 50e-6, dephasing_ops(0, gamma, &l).unwrap(), "dephase");
        let out = evolve_lindblad(&rho, &seg, DEFAULT_DT_MAX).unwrap().density_matrix();
        let (i, j) = (l.index(&[Spin::Down], &[0]).unwrap(), l.index(&[Spin::Up], &[0]).unwrap());
        assert!((out[(i, j)].re - 0.5 * (-gamma * 50e-6).exp()).abs() < 1e-10);
        assert!((out[(i, i)].re - 0.5).abs() < 1e-12);
        assert!((out[(j, j)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lindblad_accuracy_error_on_huge_steps() {
        let l = HilbertLayout::new(1, 2).unwrap();
        let seg = Segment::dissipative(
            Operator::zeros(l.dim()),
            1e-3,
            dephasing_ops(0, 1e9, &l).unwrap(),
            "stiff",
        );
        // coherence is what the stiff decay acts on
        let plus = {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut psi = Vector::zeros(l.dim());
            psi[0] = C64::from(h);
            psi[l.index(&[Spin::Up], &[0]).unwrap()] = C64::from(h);
            QuantumState::pure(l, psi).unwrap().to_density()
        };
        let res = evolve_lindblad(&plus, &seg, 1e-5);
        assert!(matches!(res, Err(Error::IntegrationAccuracy { .. })), "{res:?}");
    }

    #[test]
    fn sampling_at_zero_returns_initial() {
        let (l, h) = hop(3);
        let s = QuantumState::fock(l, &[1, 0]).unwrap();
        let out = run_schedule(&s, &[Segment::evolve(h, 1e-4, "hop")], &[0.0], DEFAULT_DT_MAX).unwrap();
        assert_eq!(out[0], s);
    }

    #[test]
    fn sample_beyond_end_is_error() {
        let (l, h) = hop(3);
        let s = QuantumState::fock(l, &[1, 0]).unwrap();
        let res = run_schedule(&s, &[Segment::evolve(h, 1e-4, "hop")], &[2e-4], DEFAULT_DT_MAX);
        assert!(matches!(res, Err(Error::SampleTimeOutOfRange { .. })));
    }

    #[test]
    fn resplitting_invariance() {
        let (l, h) = hop(3);
        let s = QuantumState::fock(l, &[1, 0]).unwrap();
        let whole = [Segment::evolve(h.clone(), 200e-6, "hop")];
        let split = [
            Segment::evolve(h.clone(), 37e-6, "a"),
            Segment::evolve(h.clone(), 100e-6, "b"),
            Segment::evolve(h, 63e-6, "c"),
        ];
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 10e-6).collect();
        let a = run_schedule(&s, &whole, &times, DEFAULT_DT_MAX).unwrap();
        let b = run_schedule(&s, &split, &times, DEFAULT_DT_MAX).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.as_pure().unwrap() - y.as_pure().unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn thermal_state_is_normalized() {
        let l = HilbertLayout::new(2, 4).unwrap();
        let s = thermal_ground_state(l, 0.04).unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-12);
        let p = thermal_distribution(0.04, 4);
        assert!((p[1] / p[0] - 0.04 / 1.04).abs() < 1e-12);
    }

    #[test]
    fn observable_evolution_is_adjoint_of_state_evolution() {
        let (l, h) = hop(3);
        let ops = dephasing_ops(0, 2.0 * PI * 4e3, &l).unwrap();
        let drive = crate::hamiltonian::build_sideband(
            &crate::hamiltonian::DriveParams::resonant(0, crate::hamiltonian::Sideband::Blue, 2.0 * PI * 40e3),
            &l,
        )
        .unwrap();
        let seg = Segment::dissipative(h.plus(&drive).unwrap(), 12e-6, ops, "bsb");
        let rho = thermal_ground_state(l, 0.1).unwrap();
        let obs = phonon_projector(&l, &[1, 0]).unwrap();
        let forward = evolve_lindblad(&rho, &seg, 20e-9).unwrap().expectation(&obs).unwrap().re;
        let heis = evolve_observable(obs.matrix(), &seg, 20e-9).unwrap();
        let backward = crate::operators::trace_product(&heis, &rho.density_matrix()).re;
        assert!((forward - backward).abs() < 1e-10);
    }
}
