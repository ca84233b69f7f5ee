use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};

use super::cochain::Cochain;
use super::cover::Cover;
use super::group::Element;
use super::CechError;

/// Compatibility tolerance on overlaps.
pub const GLUE_TOL: f64 = 1e-9;
/// Partition-of-unity normalization tolerance.
pub const PARTITION_TOL: f64 = 1e-12;

/// Local section data: for each element, vector values at the sample points it
/// contains. Sample points are shared identifiers, so an overlap is the set of
/// samples two elements have in common.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSections {
    pub values: Vec<BTreeMap<usize, DVector<f64>>>,
}

/// A glued section in every local trivialization, after the output map `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct GluedSection {
    pub per_element: Vec<BTreeMap<usize, DVector<f64>>>,
    /// Worst overlap deviation found while checking.
    pub max_deviation: f64,
}

/// Overlap where `z_α = q_αβ z_β` fails worst.
#[derive(Debug, Clone, PartialEq)]
pub struct Incompatibility {
    pub overlap: [usize; 2],
    pub sample: usize,
    pub deviation: f64,
}

fn matrix_of(e: &Element) -> Result<&DMatrix<f64>, CechError> {
    match e {
        Element::Matrix(m) => Ok(m),
        _ => Err(CechError::Group("gluing needs a matrix-valued chain".into())),
    }
}

/// Checks `z_α(s) = q_αβ z_β(s)` on every shared sample of every nerve edge
/// and, on success, applies `f` (identity when `None`) to each local section.
pub fn glue_sections(
    cover: &Cover,
    q: &Cochain,
    z: &LocalSections,
    f: Option<&DMatrix<f64>>,
) -> Result<Result<GluedSection, Incompatibility>, CechError> {
    if z.values.len() != cover.elements() {
        return Err(CechError::Cover(format!("{} local sections for {} elements", z.values.len(), cover.elements())));
    }
    let mut worst: Option<Incompatibility> = None;
    let mut max_dev = 0.0f64;
    for e in cover.simplices(1) {
        let (a, b) = (e[0], e[1]);
        let qab = matrix_of(q.get(e)?)?;
        let shared: BTreeSet<usize> = z.values[a].keys().filter(|s| z.values[b].contains_key(s)).copied().collect();
        for s in shared {
            let za = &z.values[a][&s];
            let zb = &z.values[b][&s];
            if qab.ncols() != zb.len() || qab.nrows() != za.len() {
                return Err(CechError::Cover(format!("section dimension mismatch on overlap {e:?}")));
            }
            let dev = (za - qab * zb).amax();
            max_dev = max_dev.max(dev);
            if dev > GLUE_TOL && worst.as_ref().is_none_or(|w| dev > w.deviation) {
                worst = Some(Incompatibility { overlap: [a, b], sample: s, deviation: dev });
            }
        }
    }
    if let Some(w) = worst {
        return Ok(Err(w));
    }
    let per_element = z
        .values
        .iter()
        .map(|m| m.iter().map(|(s, v)| (*s, f.map_or_else(|| v.clone(), |f| f * v))).collect())
        .collect();
    Ok(Ok(GluedSection { per_element, max_deviation: max_dev }))
}

/// Pre-Hilbert product `Σ_α Σ_s w_α(s) ⟨z1_α(s), z2_α(s)⟩`, split into the
/// first `split` components (h-part) and the rest (v-part).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreHilbert {
    pub total: f64,
    pub h: f64,
    pub v: f64,
}

pub fn pre_hilbert_product(
    z1: &GluedSection,
    z2: &GluedSection,
    weights: &[BTreeMap<usize, f64>],
    split: usize,
) -> Result<PreHilbert, CechError> {
    let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
    for (alpha, w) in weights.iter().enumerate() {
        for (s, &x) in w {
            if x < 0.0 || !x.is_finite() {
                return Err(CechError::Partition(format!("weight {x} of element {alpha} at sample {s}")));
            }
            if !z1.per_element[alpha].contains_key(s) {
                return Err(CechError::Partition(format!("element {alpha} has no value at sample {s}")));
            }
            *sums.entry(*s).or_default() += x;
        }
    }
    if let Some((s, total)) = sums.iter().find(|(_, t)| (**t - 1.0).abs() > PARTITION_TOL) {
        return Err(CechError::Partition(format!("weights sum to {total} at sample {s}")));
    }
    let (mut h, mut v) = (0.0, 0.0);
    for (alpha, w) in weights.iter().enumerate() {
        for (s, &x) in w {
            let a = &z1.per_element[alpha][s];
            let b = z2.per_element[alpha]
                .get(s)
                .ok_or_else(|| CechError::Partition(format!("second section lacks sample {s}")))?;
            let k = split.min(a.len());
            h += x * a.rows(0, k).dot(&b.rows(0, k));
            v += x * a.rows(k, a.len() - k).dot(&b.rows(k, a.len() - k));
        }
    }
    Ok(PreHilbert { total: h + v, h, v })
}

/// Manufactures compatible local sections from a seed section given in the
/// trivialization of element 0, transported along a spanning tree of edges.
pub fn sections_from_seed(
    cover: &Cover,
    q: &Cochain,
    samples: &[BTreeSet<usize>],
    seed: impl Fn(usize) -> DVector<f64>,
) -> Result<LocalSections, CechError> {
    let k = cover.elements();
    // transport[α] maps element-0 coordinates to element-α coordinates
    let mut transport: Vec<Option<DMatrix<f64>>> = vec![None; k];
    let dim = seed(0).len();
    transport[0] = Some(DMatrix::identity(dim, dim));
    let mut changed = true;
    while changed {
        changed = false;
        for e in cover.simplices(1) {
            let (a, b) = (e[0], e[1]);
            let qab = matrix_of(q.get(e)?)?;
            match (&transport[a], &transport[b]) {
                (Some(ta), None) => {
                    transport[b] = Some(qab.transpose() * ta);
                    changed = true;
                }
                (None, Some(tb)) => {
                    transport[a] = Some(qab * tb);
                    changed = true;
                }
                _ => {}
            }
        }
    }
    let values = (0..k)
        .map(|a| {
            let t =
                transport[a].clone().ok_or_else(|| CechError::Cover(format!("element {a} is not connected to 0")))?;
            Ok(samples[a].iter().map(|&s| (s, &t * seed(s))).collect())
        })
        .collect::<Result<_, CechError>>()?;
    Ok(LocalSections { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::cover::circle_cover;
    use crate::cech::group::Group;
    use crate::cech::spin::z_rotation;

    fn arcs() -> (Cover, Vec<BTreeSet<usize>>) {
        // samples 0..6 around a circle; arc α holds samples 2α, 2α+1, 2α+2
        let cover = circle_cover(3);
        let samples = (0..3).map(|a| (0..3).map(|j| (2 * a + j) % 6).collect()).collect();
        (cover, samples)
    }

    fn rotation_chain(cover: &Cover) -> Cochain {
        // a coboundary q_αβ = g_α g_β⁻¹, so it is a cocycle even around the loop
        let g = [0.0, 0.7, -1.1];
        let values =
            cover.simplices(1).iter().map(|e| (e.clone(), Element::Matrix(z_rotation(g[e[0]] - g[e[1]])))).collect();
        Cochain::new(cover, 1, Group::Orthogonal(3), values).unwrap()
    }

    #[test]
    fn identity_chain_glues_constants() {
        let (cover, samples) = arcs();
        let q = Cochain::constant(&cover, 1, Group::Orthogonal(3), Group::Orthogonal(3).identity()).unwrap();
        let z = sections_from_seed(&cover, &q, &samples, |_| DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        let glued = glue_sections(&cover, &q, &z, None).unwrap().unwrap();
        assert_eq!(glued.max_deviation, 0.0);
    }

    #[test]
    fn rotated_sections_glue_and_faults_are_found() {
        let (cover, samples) = arcs();
        let q = rotation_chain(&cover);
        let seed = |s: usize| DVector::from_vec(vec![(s as f64).cos(), 0.5, (s as f64).sin()]);
        let mut z = sections_from_seed(&cover, &q, &samples, seed).unwrap();
        assert!(glue_sections(&cover, &q, &z, None).unwrap().is_ok());
        z.values[2].get_mut(&0).unwrap()[2] += 1e-3;
        let bad = glue_sections(&cover, &q, &z, None).unwrap().unwrap_err();
        assert_eq!(bad.overlap, [0, 2]);
        assert_eq!(bad.sample, 0);
        assert!((bad.deviation - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn product_is_partition_independent() {
        let (cover, samples) = arcs();
        let q = rotation_chain(&cover);
        let z1 = sections_from_seed(&cover, &q, &samples, |s| DVector::from_vec(vec![1.0, s as f64, 0.2])).unwrap();
        let z2 = sections_from_seed(&cover, &q, &samples, |s| DVector::from_vec(vec![0.3, -1.0, s as f64])).unwrap();
        let g1 = glue_sections(&cover, &q, &z1, None).unwrap().unwrap();
        let g2 = glue_sections(&cover, &q, &z2, None).unwrap().unwrap();
        let owners = |s: usize| -> Vec<usize> { (0..3).filter(|a| samples[*a].contains(&s)).collect() };
        let even: Vec<BTreeMap<usize, f64>> =
            (0..3).map(|a| samples[a].iter().map(|&s| (s, 1.0 / owners(s).len() as f64)).collect()).collect();
        let first: Vec<BTreeMap<usize, f64>> = (0..3)
            .map(|a| samples[a].iter().map(|&s| (s, if owners(s)[0] == a { 1.0 } else { 0.0 })).collect())
            .collect();
        let p1 = pre_hilbert_product(&g1, &g2, &even, 3).unwrap();
        let p2 = pre_hilbert_product(&g1, &g2, &first, 3).unwrap();
        assert!((p1.total - p2.total).abs() < 1e-12);
        let p3 = pre_hilbert_product(&g2, &g1, &even, 3).unwrap();
        assert!((p1.total - p3.total).abs() < 1e-12);
        assert!(pre_hilbert_product(&g1, &g1, &even, 3).unwrap().total > 0.0);
        let mut skewed = even.clone();
        *skewed[0].get_mut(&1).unwrap() = 0.5;
        assert!(matches!(pre_hilbert_product(&g1, &g2, &skewed, 3), Err(CechError::Partition(_))));
    }
}
