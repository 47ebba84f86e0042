//! Brute-force reference model, written without the library's builders.
//!
//! Operators are assembled by Kronecker products over sites ordered
//! `(spin ⊗ mode)` per ion, ion 0 leftmost, spin basis `(↓, ↑)`; time
//! evolution uses a Taylor-series matrix exponential with scaling and
//! squaring.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type M = DMatrix<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn kron(a: &M, b: &M) -> M {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    M::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

/// Lowering operator on `d` Fock levels.
pub fn lower(d: usize) -> M {
    M::from_fn(d, d, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) })
}

/// `σ⁺ = |↑⟩⟨↓|` with index 0 = ↓.
pub fn sigma_plus() -> M {
    M::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)])
}

pub fn sigma_z() -> M {
    M::from_row_slice(2, 2, &[c(-1.0), c(0.0), c(0.0), c(1.0)])
}

/// Chain of `n` ions with `d` Fock levels each.
#[derive(Clone, Copy)]
pub struct Chain {
    pub n: usize,
    pub d: usize,
}

impl Chain {
    pub fn dim(&self) -> usize {
        (2 * self.d).pow(self.n as u32)
    }

    /// Place a single-site `(spin ⊗ mode)` operator on ion `k`.
    pub fn site(&self, k: usize, local: &M) -> M {
        let mut out = eye(1);
        for i in 0..self.n {
            let f = if i == k { local.clone() } else { eye(2 * self.d) };
            out = kron(&out, &f);
        }
        out
    }

    pub fn a(&self, k: usize) -> M {
        self.site(k, &kron(&eye(2), &lower(self.d)))
    }

    pub fn sp(&self, k: usize) -> M {
        self.site(k, &kron(&sigma_plus(), &eye(self.d)))
    }

    pub fn sz(&self, k: usize) -> M {
        self.site(k, &kron(&sigma_z(), &eye(self.d)))
    }

    pub fn index(&self, spins_up: &[bool], phonons: &[usize]) -> usize {
        let mut idx = 0;
        for i in 0..self.n {
            idx = idx * 2 * self.d + (spins_up[i] as usize) * self.d + phonons[i];
        }
        idx
    }

    pub fn basis(&self, spins_up: &[bool], phonons: &[usize]) -> Vec<Complex64> {
        let mut v = vec![c(0.0); self.dim()];
        v[self.index(spins_up, phonons)] = c(1.0);
        v
    }

    /// `κ/2 (a_0 a_1† + h.c.)` for two ions.
    pub fn hopping(&self, kappa: f64) -> M {
        let x = self.a(0) * self.a(1).adjoint();
        (&x + x.adjoint()) * c(kappa / 2.0)
    }

    /// Resonant red sideband `g(a†σ⁻ + aσ⁺)` on ion `k`, phase 0.
    pub fn red(&self, k: usize, g: f64) -> M {
        let x = self.a(k).adjoint() * self.sp(k).adjoint();
        (&x + x.adjoint()) * c(g)
    }

    /// Resonant blue sideband `g(a†σ⁺ + aσ⁻)` on ion `k`, phase 0.
    pub fn blue(&self, k: usize, g: f64) -> M {
        let x = self.a(k).adjoint() * self.sp(k);
        (&x + x.adjoint()) * c(g)
    }

    /// Probability of the given phonon numbers, any spins.
    pub fn phonon_prob(&self, psi: &[Complex64], phonons: &[usize]) -> f64 {
        let mut p = 0.0;
        for s in 0..(1usize << self.n) {
            let spins: Vec<bool> = (0..self.n).map(|i| (s >> (self.n - 1 - i)) & 1 == 1).collect();
            p += psi[self.index(&spins, phonons)].norm_sqr();
        }
        p
    }
}

/// `exp(A)` by Taylor series after scaling `A` below norm 1/2, then squaring.
pub fn expm(a: &M) -> M {
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let s = (norm / 0.5).log2().ceil().max(0.0) as i32;
    let scaled = a * c(0.5f64.powi(s));
    let n = a.nrows();
    let mut term = eye(n);
    let mut sum = eye(n);
    for k in 1..=30 {
        term = &term * &scaled * c(1.0 / k as f64);
        sum += &term;
        if term.iter().all(|z| z.norm() < 1e-18) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-iHt)ψ`.
pub fn evolve(h: &M, t: f64, psi: &[Complex64]) -> Vec<Complex64> {
    let u = expm(&(h * Complex64::new(0.0, -t)));
    let v = nalgebra::DVector::from_column_slice(psi);
    (u * v).iter().copied().collect()
}
