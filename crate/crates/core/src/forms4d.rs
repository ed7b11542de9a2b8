//! Exterior algebra on flat Minkowski spacetime.
//!
//! Coordinates are `(t, x, y, z) = (x⁰, x¹, x², x³)` with metric
//! `g = -e⁰⊗e⁰ + e¹⊗e¹ + e²⊗e² + e³⊗e³` and volume form
//! `⋆1 = e⁰∧e¹∧e²∧e³`.
//!
//! A general (inhomogeneous) form is stored in [`Form`] as 16 coefficients
//! indexed by a bitmask: bit `a` set means `eᵃ` is a factor, factors taken in
//! ascending order. [`TwoForm`] is the typed view used everywhere else, with
//! the ordered basis
//!
//! ```text
//! slot:   0      1      2      3      4      5
//! basis:  e⁰∧e¹  e⁰∧e²  e⁰∧e³  e²∧e³  e³∧e¹  e¹∧e²
//! ```
//!
//! Sign conventions. The Hodge map satisfies `α∧⋆β = ⟨α,β⟩ ⋆1`, which gives
//! `⋆(e⁰∧e¹) = -e²∧e³` (and cyclic) and `⋆(e²∧e³) = e⁰∧e¹`. The Faraday form
//! `F = dt∧E + ⋆(dt∧B)` therefore has coefficients
//! `(E_x, E_y, E_z, -B_x, -B_y, -B_z)`, so a background `B_x` appears as
//! `-B_x dy∧dz`. With these signs `⋆(F∧⋆F) = E² - B²` and `⋆(F∧F) = 2E·B`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Vector3;

/// Spatial 3-vector (field strengths in units with c = ε₀ = 1).
pub type Vec3 = Vector3<f64>;

/// Electric and magnetic field at a spacetime point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPoint {
    pub e: Vec3,
    pub b: Vec3,
}

impl FieldPoint {
    pub fn new(e: Vec3, b: Vec3) -> Self {
        Self { e, b }
    }

    pub fn to_two_form(&self) -> TwoForm {
        TwoForm::from_eb(&self.e, &self.b)
    }
}

const VOLUME: u8 = 0b1111;

fn grade(mask: u8) -> u32 {
    mask.count_ones()
}

/// Sign of `e^A ∧ e^B` relative to the canonical ordering of `A ∪ B`;
/// zero when the factors overlap.
fn wedge_sign(a: u8, b: u8) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut swaps = 0;
    for i in 0..4 {
        if a & (1 << i) != 0 {
            // factors of b with a smaller index must move past e^i
            swaps += (b & ((1 << i) - 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `⟨e^A, e^A⟩` for the Lorentzian metric: -1 if `e⁰` is a factor.
fn blade_norm(mask: u8) -> f64 {
    if mask & 1 != 0 {
        -1.0
    } else {
        1.0
    }
}

/// `⋆e^A = sign · e^{complement}`.
fn hodge_blade(mask: u8) -> (f64, u8) {
    let comp = VOLUME & !mask;
    (blade_norm(mask) * wedge_sign(mask, comp), comp)
}

/// Inhomogeneous differential form with constant coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Form {
    c: [f64; 16],
}

impl Form {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(value: f64) -> Self {
        let mut f = Self::zero();
        f.c[0] = value;
        f
    }

    /// Basis blade `e^{i₁}∧…∧e^{iₖ}` from an index list (any order).
    pub fn basis(indices: &[usize]) -> Self {
        let mut f = Self::scalar(1.0);
        for &i in indices {
            assert!(i < 4, "coordinate index out of range");
            f = f.wedge(&Self::one_form([0, 1, 2, 3].map(|j| if j == i { 1.0 } else { 0.0 })));
        }
        f
    }

    pub fn one_form(c: [f64; 4]) -> Self {
        let mut f = Self::zero();
        for (i, v) in c.into_iter().enumerate() {
            f.c[1 << i] = v;
        }
        f
    }

    /// Coefficient times the volume form `⋆1`.
    pub fn volume(value: f64) -> Self {
        let mut f = Self::zero();
        f.c[VOLUME as usize] = value;
        f
    }

    pub fn coeff(&self, mask: u8) -> f64 {
        self.c[mask as usize]
    }

    pub fn set_coeff(&mut self, mask: u8, value: f64) {
        self.c[mask as usize] = value;
    }

    /// Keeps only the degree-`p` part.
    pub fn grade_part(&self, p: u32) -> Self {
        let mut f = Self::zero();
        for m in 0..16u8 {
            if grade(m) == p {
                f.c[m as usize] = self.c[m as usize];
            }
        }
        f
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for a in 0..16u8 {
            let ca = self.c[a as usize];
            if ca == 0.0 {
                continue;
            }
            for b in 0..16u8 {
                let cb = other.c[b as usize];
                if cb == 0.0 || a & b != 0 {
                    continue;
                }
                out.c[(a | b) as usize] += wedge_sign(a, b) * ca * cb;
            }
        }
        out
    }

    pub fn hodge(&self) -> Self {
        let mut out = Self::zero();
        for m in 0..16u8 {
            let (s, comp) = hodge_blade(m);
            out.c[comp as usize] += s * self.c[m as usize];
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

impl Add for Form {
    type Output = Form;
    fn add(mut self, rhs: Form) -> Form {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, rhs: Form) -> Form {
        self + (-rhs)
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(mut self) -> Form {
        self.c.iter_mut().for_each(|v| *v = -*v);
        self
    }
}

impl Mul<Form> for f64 {
    type Output = Form;
    fn mul(self, mut rhs: Form) -> Form {
        rhs.c.iter_mut().for_each(|v| *v *= self);
        rhs
    }
}

/// `d ω = Σₐ eᵃ ∧ ∂ₐω`, given the coordinate partial derivatives of `ω`.
pub fn exterior_derivative(partials: &[Form; 4]) -> Form {
    partials
        .iter()
        .enumerate()
        .fold(Form::zero(), |acc, (a, p)| acc + Form::basis(&[a]).wedge(p))
}

/// Bitmask and orientation sign of each [`TwoForm`] slot.
const TWO_FORM_SLOTS: [(u8, f64); 6] = [
    (0b0011, 1.0),  // e0^e1
    (0b0101, 1.0),  // e0^e2
    (0b1001, 1.0),  // e0^e3
    (0b1100, 1.0),  // e2^e3
    (0b1010, -1.0), // e3^e1 = -e1^e3
    (0b0110, 1.0),  // e1^e2
];

/// 2-form on spacetime in the slot basis documented at module level.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TwoForm {
    pub c: [f64; 6],
}

impl TwoForm {
    pub fn new(c: [f64; 6]) -> Self {
        Self { c }
    }

    /// Basis element for `slot` (0..6).
    pub fn basis(slot: usize) -> Self {
        let mut c = [0.0; 6];
        c[slot] = 1.0;
        Self { c }
    }

    /// Faraday-type form `dt∧E + ⋆(dt∧B)`.
    pub fn from_eb(e: &Vec3, b: &Vec3) -> Self {
        Self {
            c: [e.x, e.y, e.z, -b.x, -b.y, -b.z],
        }
    }

    /// Inverse of [`TwoForm::from_eb`]: the electric and magnetic blocks.
    pub fn to_eb(&self) -> (Vec3, Vec3) {
        let c = &self.c;
        (
            Vec3::new(c[0], c[1], c[2]),
            Vec3::new(-c[3], -c[4], -c[5]),
        )
    }

    pub fn to_form(&self) -> Form {
        let mut f = Form::zero();
        for (&(mask, sign), &v) in TWO_FORM_SLOTS.iter().zip(&self.c) {
            f.set_coeff(mask, sign * v);
        }
        f
    }

    /// Degree-2 part of `f` (other degrees are dropped).
    pub fn from_form(f: &Form) -> Self {
        let mut c = [0.0; 6];
        for (slot, &(mask, sign)) in TWO_FORM_SLOTS.iter().enumerate() {
            c[slot] = sign * f.coeff(mask);
        }
        Self { c }
    }

    pub fn hodge(&self) -> Self {
        Self::from_form(&self.to_form().hodge())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: self.c.map(|v| s * v),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

impl Add for TwoForm {
    type Output = TwoForm;
    fn add(mut self, rhs: TwoForm) -> TwoForm {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl Sub for TwoForm {
    type Output = TwoForm;
    fn sub(self, rhs: TwoForm) -> TwoForm {
        self + rhs.scale(-1.0)
    }
}

/// Coefficient of `⋆1`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FourForm(pub f64);

impl FourForm {
    /// `⋆(c ⋆1) = -c` in Lorentzian signature.
    pub fn hodge(&self) -> f64 {
        Form::volume(self.0).hodge().coeff(0)
    }
}

pub fn wedge22(a: &TwoForm, b: &TwoForm) -> FourForm {
    FourForm(a.to_form().wedge(&b.to_form()).coeff(VOLUME))
}

/// `X = E² - B²`, `Y = 2 E·B`.
pub fn invariants(e: &Vec3, b: &Vec3) -> (f64, f64) {
    (e.norm_squared() - b.norm_squared(), 2.0 * e.dot(b))
}

/// `(⋆(F∧⋆F), ⋆(F∧F))` evaluated through the exterior algebra.
pub fn invariants_of(f: &TwoForm) -> (f64, f64) {
    (wedge22(f, &f.hodge()).hodge(), wedge22(f, f).hodge())
}
