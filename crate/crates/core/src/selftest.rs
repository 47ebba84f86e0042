//! Structural invariant suite behind the `selftest` command.

use crate::dynamics::{evolve, run_schedule, Segment};
use crate::error::Result;
use crate::experiment::{preset, run_scenario_exact, Observable, Scenario};
use crate::hamiltonian::{
    build_hopping, build_sideband, dispersive_chi, phase_shift_unitary, rotation_unitary, DriveParams, HoppingGraph,
    Sideband,
};
use crate::operators::{
    annihilation, creation, embed, max_abs, propagator, unitary_deviation, Factor, HilbertLayout, Matrix, Operator,
    QuantumState, Spin, Vector, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;

const SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        writeln!(f, "{} checks, {} failed", self.checks.len(), self.failures())
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CHECKS: [(&str, Check); 11] = [
    ("ladder-phase-identities", ladder_phase_identities),
    ("hopping-sign-flip", hopping_sign_flip),
    ("unitarity", unitarity),
    ("lindblad-trace-positivity", lindblad_trace_positivity),
    ("semigroup-resplitting", semigroup_resplitting),
    ("rk4-fourth-order", rk4_fourth_order),
    ("two-pi-sign-flip", two_pi_sign_flip),
    ("multi-phonon-no-refocus", multi_phonon_no_refocus),
    ("embed-homomorphism", embed_homomorphism),
    ("excitation-conservation", excitation_conservation),
    ("dispersive-convergence", dispersive_convergence),
];

/// Run every check; errors count as failures.
pub fn run_selftest() -> SelftestReport {
    let checks = CHECKS
        .iter()
        .map(|(name, check)| match check() {
            Ok((passed, detail)) => CheckResult { name, passed, detail },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect();
    SelftestReport { checks }
}

fn random_layout(rng: &mut ChaCha8Rng) -> Result<HilbertLayout> {
    let n = rng.gen_range(1..=2);
    let d = rng.gen_range(2..=4);
    HilbertLayout::new(n, d)
}

fn random_state(layout: HilbertLayout, rng: &mut ChaCha8Rng) -> Result<QuantumState> {
    let v = Vector::from_fn(layout.dim(), |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    QuantumState::pure(layout, v.normalize())
}

fn random_hermitian(dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> Result<Operator> {
    let a = Matrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    Operator::hermitian((&a + a.adjoint()) * C64::from(0.5 * scale))
}

/// `U† a† U = e^{-iθ} a†` and `U† a U = e^{iθ} a` for `U = e^{iθ a†a}`.
fn ladder_phase_identities() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let l = random_layout(&mut rng)?;
        let theta = rng.gen_range(-PI..PI);
        let k = rng.gen_range(0..l.n_ions());
        let u = phase_shift_unitary(k, theta, &l)?;
        let a = embed(&annihilation(l.fock_cutoff())?, k, Factor::Mode, &l)?;
        let ad = embed(&creation(l.fock_cutoff())?, k, Factor::Mode, &l)?;
        let ud = u.matrix().adjoint();
        let lhs_up = &ud * ad.matrix() * u.matrix();
        let lhs_down = &ud * a.matrix() * u.matrix();
        worst = worst
            .max(max_abs(&(lhs_up - ad.matrix() * C64::from_polar(1.0, -theta))))
            .max(max_abs(&(lhs_down - a.matrix() * C64::from_polar(1.0, theta))));
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.1e} over 20 random cases")))
}

/// `U H_hop U† = -H_hop` for `θ = π` and the resulting echo.
fn hopping_sign_flip() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    let mut echo: f64 = 0.0;
    for _ in 0..10 {
        let l = HilbertLayout::new(2, rng.gen_range(2..=4))?;
        let kappa = rng.gen_range(0.1..10.0) * 2.0 * PI * 1e3;
        let h = build_hopping(&HoppingGraph::pair(kappa)?, &l)?;
        let u = phase_shift_unitary(rng.gen_range(0..2), PI, &l)?;
        let flipped = u.matrix() * h.matrix() * u.matrix().adjoint();
        worst = worst.max(max_abs(&(flipped + h.matrix())));
        let t = rng.gen_range(0.0..200e-6);
        let p = propagator(&h, t)?;
        let psi = random_state(l, &mut rng)?;
        let back = p.matrix() * u.matrix() * p.matrix() * u.matrix().adjoint() * psi.as_pure().expect("pure");
        echo = echo.max((back - psi.as_pure().expect("pure")).camax());
    }
    Ok((
        worst < 1e-9 && echo < 1e-9,
        format!("|UHU† + H| {worst:.1e}, echo residual {echo:.1e}"),
    ))
}

fn unitarity() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for _ in 0..10 {
        let l = random_layout(&mut rng)?;
        let h = random_hermitian(l.dim(), 1e5, &mut rng)?;
        let u = propagator(&h, rng.gen_range(0.0..1e-4))?;
        worst = worst.max(unitary_deviation(u.matrix()));
        let psi = random_state(l, &mut rng)?;
        let out = evolve(&psi, &Segment::evolve(h, 3e-5, "random"), 10e-9)?;
        norm = norm.max((out.trace() - 1.0).abs());
    }
    Ok((
        worst < 1e-10 && norm < 1e-9,
        format!("|U†U - I| {worst:.1e}, norm drift {norm:.1e}"),
    ))
}

fn lindblad_trace_positivity() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let (mut trace, mut herm, mut neg): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..6 {
        let l = random_layout(&mut rng)?;
        let h = random_hermitian(l.dim(), 2e5, &mut rng)?;
        let gamma = rng.gen_range(1e3..1e5);
        let ops = crate::dynamics::dephasing_ops(0, gamma, &l)?;
        let rho = random_state(l, &mut rng)?.to_density();
        let out = evolve(&rho, &Segment::dissipative(h, 2e-5, ops, "random"), 10e-9)?;
        trace = trace.max((out.trace() - 1.0).abs());
        let m = out.density_matrix();
        herm = herm.max(max_abs(&(&m - m.adjoint())));
        neg = neg.min(out.min_eigenvalue());
    }
    Ok((
        trace < 1e-8 && herm < 1e-10 && neg > -1e-8,
        format!("trace drift {trace:.1e}, |ρ - ρ†| {herm:.1e}, min eigenvalue {neg:.1e}"),
    ))
}

/// Snapshots do not depend on where sample points split the segments.
fn semigroup_resplitting() -> Result<(bool, String)> {
    let s = preset("fig4b")?;
    let app = crate::experiment::Apparatus::from_scenario(&s)?;
    let init = app.prepare(&s.initial_phonons, &s.prep)?;
    let body = app.body_segments(&s.dd_pulses, 200e-6)?;
    let coarse = run_schedule(&init, &body, &[200e-6], s.dt_max)?;
    let fine_times: Vec<f64> = (1..=80).map(|k| k as f64 * 2.5e-6).collect();
    let fine = run_schedule(&init, &body, &fine_times, s.dt_max)?;
    let a = coarse[0].as_pure().expect("pure");
    let b = fine.last().expect("samples").as_pure().expect("pure");
    let diff = (a - b).camax();
    Ok((diff < 1e-9, format!("max amplitude difference {diff:.1e}")))
}

fn fig5b_columns(dt_ns: f64) -> Result<Vec<f64>> {
    let mut s = preset("fig5b")?;
    s.dt_max = dt_ns * 1e-9;
    s.shots = 0;
    let ts = run_scenario_exact(&s)?;
    Ok(ts.columns.iter().flat_map(|c| c.values.iter().copied()).collect())
}

/// Error against a fine reference drops ≈16× per halving of the step.
fn rk4_fourth_order() -> Result<(bool, String)> {
    let reference = fig5b_columns(50.0)?;
    let err = |dt: f64| -> Result<f64> {
        let v = fig5b_columns(dt)?;
        Ok(v.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    };
    let (e1, e2) = (err(400.0)?, err(200.0)?);
    let ratio = e1 / e2;
    Ok((
        (12.0..=20.0).contains(&ratio),
        format!("errors {e1:.2e} → {e2:.2e}, ratio {ratio:.1}"),
    ))
}

/// `R(2π, φ)|↓,1⟩ = -|↓,1⟩` on the red sideband for any φ.
fn two_pi_sign_flip() -> Result<(bool, String)> {
    let l = HilbertLayout::new(1, 3)?;
    let idx = l.index(&[Spin::Down], &[1])?;
    let mut worst: f64 = 0.0;
    for k in 0..8 {
        let phi = k as f64 * PI / 4.0;
        let params = DriveParams::resonant(0, Sideband::Red, 1.0).with_phase(phi);
        let u = rotation_unitary(&params, 2.0 * PI, &l)?;
        let mut col: Vector = u.matrix().column(idx).into();
        col[idx] += C64::from(1.0);
        worst = worst.max(col.camax());
    }
    Ok((worst < 1e-12, format!("max |R|↓,1⟩ + |↓,1⟩| {worst:.1e}")))
}

/// fig4b-style 2π red-sideband echo applied to `|2,0⟩`.
pub fn two_phonon_echo() -> Result<f64> {
    let mut s: Scenario = preset("fig4b")?;
    s.layout = HilbertLayout::new(2, 4)?;
    s.initial_phonons = vec![2, 0];
    s.observables = vec![Observable::phonons("P20", &[2, 0])];
    let pulse = s.dd_pulses[0];
    let echo = 2.0 * pulse.time + pulse.pulse.duration();
    s.tau_grid = vec![echo];
    Ok(run_scenario_exact(&s)?.columns[0].values[0])
}

fn multi_phonon_no_refocus() -> Result<(bool, String)> {
    let p = two_phonon_echo()?;
    Ok((p < 0.9, format!("P20 at the echo time {p:.6}")))
}

/// Embedding respects products and sums.
fn embed_homomorphism() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let l = random_layout(&mut rng)?;
        let d = l.fock_cutoff();
        let k = rng.gen_range(0..l.n_ions());
        let a = Operator::general(Matrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.3)))?;
        let b = Operator::general(Matrix::from_fn(d, d, |_, _| C64::new(0.1, rng.gen_range(-1.0..1.0))))?;
        let ea = embed(&a, k, Factor::Mode, &l)?;
        let eb = embed(&b, k, Factor::Mode, &l)?;
        let prod = embed(&a.compose(&b)?, k, Factor::Mode, &l)?;
        let sum = embed(&a.plus(&b)?, k, Factor::Mode, &l)?;
        worst = worst
            .max(max_abs(&(prod.matrix() - ea.matrix() * eb.matrix())))
            .max(max_abs(&(sum.matrix() - ea.matrix() - eb.matrix())));
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.1e}")))
}

/// Red sideband conserves `a†a + |↑⟩⟨↑|`, blue conserves `a†a - |↑⟩⟨↑|`.
fn excitation_conservation() -> Result<(bool, String)> {
    let l = HilbertLayout::new(2, 4)?;
    let mut worst: f64 = 0.0;
    for (sb, sign) in [(Sideband::Red, 1.0), (Sideband::Blue, -1.0)] {
        for ion in 0..2 {
            let h = build_sideband(&DriveParams::resonant(ion, sb, 2.0 * PI * 50e3), &l)?;
            let n = embed(&crate::operators::number(4)?, ion, Factor::Mode, &l)?;
            let up = embed(
                &Operator::hermitian(Matrix::from_diagonal(&Vector::from_vec(vec![C64::from(0.0), C64::from(1.0)])))?,
                ion,
                Factor::Spin,
                &l,
            )?;
            let q = n.matrix() + up.matrix() * C64::from(sign);
            let c = h.matrix() * &q - &q * h.matrix();
            // the top Fock level has no partner, so the blue coupling leaks there
            let d = l.dim();
            let mask = Matrix::from_fn(d, d, |i, j| {
                let top = |x: usize| l.decode(x).1[ion] == 3;
                if top(i) || top(j) {
                    C64::from(0.0)
                } else {
                    c[(i, j)]
                }
            });
            worst = worst.max(max_abs(&mask) / h.matrix().camax().max(1.0));
        }
    }
    Ok((worst < 1e-12, format!("max relative commutator {worst:.1e}")))
}

/// Relative error between the phase the detuned red sideband imprints on
/// `|↓,1⟩` relative to `|↓,0⟩` over `T = π/χ` and the dispersive value `χT`.
pub fn dispersive_phase_error(g: f64, detuning: f64) -> Result<f64> {
    let l = HilbertLayout::new(1, 3)?;
    let params = DriveParams::resonant(0, Sideband::Red, 2.0 * g).with_detuning(detuning);
    let h = build_sideband(&params, &l)?;
    let chi = dispersive_chi(2.0 * g, detuning)?;
    let t = PI / chi.abs();
    let u = propagator(&h, t)?;
    let i0 = l.index(&[Spin::Down], &[0])?;
    let i1 = l.index(&[Spin::Down], &[1])?;
    let rel = (u.matrix()[(i1, i1)] / u.matrix()[(i0, i0)]).arg();
    let expected = chi * t;
    let unwrapped = rel + 2.0 * PI * ((expected - rel) / (2.0 * PI)).round();
    Ok(((unwrapped - expected) / expected).abs())
}

fn dispersive_convergence() -> Result<(bool, String)> {
    let g = 2.0 * PI * 25e3;
    let errs = [20.0, 40.0, 80.0]
        .iter()
        .map(|m| dispersive_phase_error(g, m * g))
        .collect::<Result<Vec<_>>>()?;
    let ok = errs[0] < 0.05 && errs.windows(2).all(|w| w[1] < w[0]);
    Ok((
        ok,
        format!(
            "relative errors {:.3e}, {:.3e}, {:.3e} at Δ = 20g, 40g, 80g",
            errs[0], errs[1], errs[2]
        ),
    ))
}
