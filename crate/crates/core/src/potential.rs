//! Geometric potentials on the induced shift.
//!
//! τ(x) = B_{ξ(x)}(o, g_{x₀} o): the Busemann displacement of the origin
//! under the letter's return isometry, evaluated at the letter's canonical
//! boundary point. Birkhoff sums of τ over periodic letter words are closed
//! geodesic lengths, which is the oracle all of this is tested against. A
//! second representation sharing the same marked labels evaluates to the
//! companion potential κ on the identical alphabet.

use std::io::Write as IoWrite;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coding::InducedShift;
use crate::error::{Error, Result};
use crate::hyp::busemann;
use crate::num::CompensatedSum;
use crate::rep::FuchsianRep;

/// Locally constant approximation of a geometric potential: one value per
/// letter with its rigor data.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    pub values: Vec<f64>,
    /// Chordal diameter of the letter's forward cylinder.
    pub diam: Vec<f64>,
    /// Value-error bound from the Busemann modulus of continuity.
    pub err: Vec<f64>,
    /// |x₀|, the σ₁-length of the letter.
    pub word_len: Vec<u32>,
    /// Parameter record of the representation that produced the values.
    pub rep_params: serde_json::Value,
    pub depth: usize,
}

impl PotentialTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// CSV export: letter id, |x₀|, value, error bound.
    pub fn write_csv(&self, out: &mut dyn IoWrite) -> Result<()> {
        writeln!(out, "id,word_len,value,err_bound")?;
        for e in 0..self.len() {
            writeln!(
                out,
                "{e},{},{:.17e},{:.3e}",
                self.word_len[e], self.values[e], self.err[e]
            )?;
        }
        Ok(())
    }
}

fn check_compatible(rep: &FuchsianRep, shift: &InducedShift) -> Result<()> {
    if rep.k() != shift.k || rep.cycle_set != shift.rep_cycles {
        return Err(Error::TypePreserving(
            "representation does not share the marked labels and cusp cycles of the shift".into(),
        ));
    }
    Ok(())
}

fn evaluate(rep: &FuchsianRep, shift: &InducedShift, depth: usize) -> Result<PotentialTable> {
    check_compatible(rep, shift)?;
    let origin = Complex64::new(0.0, 0.0);
    let rows: Result<Vec<(f64, f64, f64)>> = (0..shift.n_letters())
        .into_par_iter()
        .map(|e| {
            let (xi, diam) = shift.canonical_xi_and_diam(rep, e)?;
            let g = shift.group_element(rep, e);
            let y = g.origin_image();
            let value = busemann(xi, origin, y)?;
            let dist = (xi - y).norm();
            let err = if dist > diam {
                2.0 * diam / (dist - diam)
            } else {
                f64::INFINITY
            };
            Ok((value, diam, err))
        })
        .collect();
    let rows = rows?;
    Ok(PotentialTable {
        values: rows.iter().map(|r| r.0).collect(),
        diam: rows.iter().map(|r| r.1).collect(),
        err: rows.iter().map(|r| r.2).collect(),
        word_len: (0..shift.n_letters())
            .map(|e| shift.word_len(e) as u32)
            .collect(),
        rep_params: rep.params.clone(),
        depth,
    })
}

/// Evaluate the geometric potential of the representation that built the
/// shift.
pub fn evaluate_tau(rep: &FuchsianRep, shift: &InducedShift, depth: usize) -> Result<PotentialTable> {
    evaluate(rep, shift, depth)
}

/// Evaluate the companion potential of a type-preserving partner on the same
/// alphabet (the boundary identification is implicit in the shared symbolic
/// sequences).
pub fn evaluate_kappa(
    rep2: &FuchsianRep,
    shift: &InducedShift,
    depth: usize,
) -> Result<PotentialTable> {
    evaluate(rep2, shift, depth)
}

/// Birkhoff sum of the potential over a periodic word of letters, with every
/// ξ resolved exactly at its periodic point (not the canonical-continuation
/// approximation). The sum telescopes to the translation length of the
/// underlying isometry.
pub fn birkhoff_sum(
    rep: &FuchsianRep,
    shift: &InducedShift,
    letter_cycle: &[u32],
) -> Result<f64> {
    if letter_cycle.is_empty() {
        return Err(Error::Coding("empty periodic word".into()));
    }
    check_compatible(rep, shift)?;
    for i in 0..letter_cycle.len() {
        let a = letter_cycle[i] as usize;
        let b = letter_cycle[(i + 1) % letter_cycle.len()] as usize;
        if !shift.admissible(a, b) {
            return Err(Error::Coding(format!(
                "letters {a} → {b} are not admissible"
            )));
        }
    }
    // underlying σ₁ period: concatenation of return words
    let mut sigma: Vec<u8> = Vec::new();
    let mut starts = Vec::with_capacity(letter_cycle.len());
    for &e in letter_cycle {
        let e = e as usize;
        starts.push(sigma.len());
        let word = shift.letter_word(e);
        let i = shift.pos1_index(e);
        let na = shift.letters[e].return_time as usize;
        sigma.extend_from_slice(&word[i..i + na]);
    }
    let origin = Complex64::new(0.0, 0.0);
    let mut acc = CompensatedSum::new();
    for (&e, &at) in letter_cycle.iter().zip(&starts) {
        let xi = shift.periodic_xi(rep, &sigma, at)?;
        let g = shift.group_element(rep, e as usize);
        acc.add(busemann(xi, origin, g.origin_image())?);
    }
    Ok(acc.value())
}
