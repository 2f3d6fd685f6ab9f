//! The classical lattice Hamiltonian as a polynomial in mode operators.
//!
//! On the selected subspace, the field decomposes as
//!
//! ```text
//!   phi_j(x) = sum_s [ g_s(x) alpha_s + conj(g_s(x)) conj(alpha_s) ],
//!   g_s(x) = e^{i p_s x} / sqrt(2 w_s L a),
//! ```
//!
//! and the quadratic energy collapses exactly to `sum_s w_s |alpha_s|^2`.
//! Substituting `alpha -> a`, `conj(alpha) -> a^dag` monomial by monomial
//! gives the normal-product Hamiltonian: its coherent-state expectations
//! reproduce the classical energy of the (projected) state, which is the
//! identity the equivalence experiments test. The anti-normal form realizes
//! the same classical monomials with every `a` to the left, carried back to
//! an assemblable normal form through the exact reordering identity: for
//! the free field this shifts the spectrum by the zero-point sum of the
//! mode frequencies.

use num_complex::Complex64;

use super::ModeBasis;
use crate::error::{Error, Result};
use crate::field::{FieldModel, Potential};
use crate::fock::{FockSpec, ModeMonomial, NormalPoly, OperatorMatrix};

/// Interaction terms `(power, coefficient)` of a polynomial potential.
fn polynomial_terms(potential: &Potential) -> Result<Vec<(u32, f64)>> {
    match potential {
        Potential::Free => Ok(vec![]),
        Potential::Phi4 { lambda } => Ok(vec![(4, *lambda)]),
        Potential::Polynomial { terms } => Ok(terms.clone()),
        Potential::SineGordon { .. } => Err(Error::Unsupported(
            "sine-Gordon potential is not polynomial; expand it explicitly \
             (e.g. Potential::Polynomial) before building mode operators"
                .into(),
        )),
    }
}

/// The classical Hamiltonian restricted to the basis's selected subspace,
/// as a polynomial in the classical amplitudes (normal-ordered layout:
/// `creators` count conjugated amplitudes). Requires a polynomial potential.
pub fn classical_hamiltonian_poly(model: &FieldModel, basis: &ModeBasis) -> Result<NormalPoly> {
    if basis.lattice() != &model.lattice {
        return Err(Error::InvalidParameter(
            "basis was built over a different lattice".into(),
        ));
    }
    let interaction = polynomial_terms(&model.potential)?;
    let m = basis.num_modes();
    let mut poly = NormalPoly::new(m);
    for (s, mode) in basis.modes().iter().enumerate() {
        poly.add_number(s, mode.frequency);
    }
    if interaction.is_empty() {
        return Ok(poly);
    }

    let l = basis.lattice().sites;
    let a = basis.lattice().spacing;
    let la = basis.lattice().length();
    // g_s(x_n) per mode.
    let g: Vec<Vec<Complex64>> = basis
        .modes()
        .iter()
        .map(|mode| {
            (0..l)
                .map(|n| {
                    let phase = 2.0 * std::f64::consts::PI * (mode.k * n % l) as f64 / l as f64;
                    Complex64::from_polar(1.0 / (2.0 * mode.frequency * la).sqrt(), phase)
                })
                .collect()
        })
        .collect();

    for component in 0..model.components() {
        // Symbols of this component: (mode, conjugated?) with per-site values.
        let symbols: Vec<(usize, bool)> = basis
            .modes()
            .iter()
            .enumerate()
            .filter(|(_, mode)| mode.component == component)
            .flat_map(|(s, _)| [(s, false), (s, true)])
            .collect();
        if symbols.is_empty() {
            continue;
        }
        for &(degree, coeff) in &interaction {
            if coeff == 0.0 {
                continue;
            }
            add_power_terms(&mut poly, &symbols, &g, degree, coeff * a, l);
        }
    }
    Ok(poly)
}

/// Expand `coeff * sum_x phi(x)^degree` over the component's symbols by
/// enumerating multisets (combinations with repetition) of the factors.
fn add_power_terms(
    poly: &mut NormalPoly,
    symbols: &[(usize, bool)],
    g: &[Vec<Complex64>],
    degree: u32,
    coeff: f64,
    sites: usize,
) {
    let modes = poly.modes();
    let ns = symbols.len();
    // multiplicities[i] = how many factors take symbol i.
    let mut multiplicities = vec![0u32; ns];
    fn recurse(
        poly: &mut NormalPoly,
        symbols: &[(usize, bool)],
        g: &[Vec<Complex64>],
        mult: &mut Vec<u32>,
        from: usize,
        remaining: u32,
        coeff: f64,
        sites: usize,
        modes: usize,
    ) {
        if remaining == 0 {
            emit_term(poly, symbols, g, mult, coeff, sites, modes);
            return;
        }
        if from == symbols.len() {
            return;
        }
        for take in (0..=remaining).rev() {
            mult[from] = take;
            recurse(
                poly,
                symbols,
                g,
                mult,
                from + 1,
                remaining - take,
                coeff,
                sites,
                modes,
            );
        }
        mult[from] = 0;
    }
    recurse(
        poly,
        symbols,
        g,
        &mut multiplicities,
        0,
        degree,
        coeff,
        sites,
        modes,
    );
}

fn emit_term(
    poly: &mut NormalPoly,
    symbols: &[(usize, bool)],
    g: &[Vec<Complex64>],
    mult: &[u32],
    coeff: f64,
    sites: usize,
    modes: usize,
) {
    // Multinomial coefficient degree! / prod(mult!).
    let degree: u32 = mult.iter().sum();
    let mut multinomial = 1.0;
    let mut assigned = 0u32;
    for &k in mult {
        for j in 1..=k {
            assigned += 1;
            multinomial *= assigned as f64 / j as f64;
        }
    }
    debug_assert_eq!(assigned, degree);
    // Lattice sum of the product of symbol values.
    let mut site_sum = Complex64::new(0.0, 0.0);
    for x in 0..sites {
        let mut prod = Complex64::new(1.0, 0.0);
        for (i, &(mode, conj)) in symbols.iter().enumerate() {
            let v = if conj { g[mode][x].conj() } else { g[mode][x] };
            for _ in 0..mult[i] {
                prod *= v;
            }
        }
        site_sum += prod;
    }
    let total = site_sum * coeff * multinomial;
    if total.norm() < 1e-300 {
        return;
    }
    let mut creators = vec![0u32; modes];
    let mut annihilators = vec![0u32; modes];
    for (i, &(mode, conj)) in symbols.iter().enumerate() {
        if conj {
            creators[mode] += mult[i];
        } else {
            annihilators[mode] += mult[i];
        }
    }
    poly.add_term(ModeMonomial::new(creators, annihilators), total);
}

fn check_spec(spec: &FockSpec, basis: &ModeBasis) -> Result<()> {
    if spec != basis.fock() {
        return Err(Error::DimensionMismatch {
            expected: basis.fock().dim(),
            actual: spec.dim(),
        });
    }
    Ok(())
}

/// Normal-product Hamiltonian `H_n`: every `a^dag` left of every `a`, term
/// by term, assembled densely over `spec`.
///
/// The cutoff should dominate the polynomial degree (`n_max` at least the
/// highest power); the operator is still assembled when it does not, with
/// correspondingly larger truncation error.
pub fn normal_ordered_hamiltonian(
    spec: &FockSpec,
    model: &FieldModel,
    basis: &ModeBasis,
) -> Result<OperatorMatrix> {
    check_spec(spec, basis)?;
    classical_hamiltonian_poly(model, basis)?.to_matrix(spec)
}

/// Anti-normal-product Hamiltonian: the same classical monomials realized
/// with every `a` left of every `a^dag`, reordered through the exact ladder
/// identity before assembly (so e.g. the free field gains exactly
/// `sum_p w(p)` relative to [`normal_ordered_hamiltonian`]).
pub fn anti_normal_ordered_hamiltonian(
    spec: &FockSpec,
    model: &FieldModel,
    basis: &ModeBasis,
) -> Result<OperatorMatrix> {
    check_spec(spec, basis)?;
    let normal = classical_hamiltonian_poly(model, basis)?;
    let terms: Vec<(ModeMonomial, Complex64)> =
        normal.terms().map(|(m, c)| (m.clone(), *c)).collect();
    NormalPoly::from_anti_normal(normal.modes(), &terms).to_matrix(spec)
}
