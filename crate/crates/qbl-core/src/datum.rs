//! The quiver datum: source and target spaces, surjective arrow matrices, and
//! one inverse exponent per target. Arrows run from sources to targets only,
//! so the underlying graph is bipartite; several arrows may share both
//! endpoints.
//!
//! Exponents are stored as inverse exponents `w = 1/p` in `[0, 1]`, with
//! `p = infinity` stored as `w = 0`. All structural data is exact.

use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::exact::{check_unit_interval, rational_to_string, Rat, RatMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    /// Position in the datum's arrow list; stable across splitting.
    pub id: usize,
    /// Source vertex, 0-based.
    pub source: usize,
    /// Target vertex, 0-based.
    pub target: usize,
    /// e_target x d_source matrix acting on source coordinates.
    pub matrix: RatMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiverDatum {
    source_dims: Vec<usize>,
    target_dims: Vec<usize>,
    arrows: Vec<Arrow>,
    /// Inverse exponents w_j = 1/p_j, one per target.
    inv_exponents: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: &'static str,
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}] {}: {}", v.code, v.location, v.message)?;
        }
        Ok(())
    }
}

/// One split part: the restriction of a datum to a single source, with each
/// arrow's target duplicated into a fresh vertex that keeps its exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPart {
    /// Source vertex of the original datum this part restricts to.
    pub source: usize,
    /// Subspace-quiver datum: one source, one target per original arrow.
    pub datum: QuiverDatum,
    /// For target k of `datum`: the original (target, arrow id) it copies.
    pub origins: Vec<TargetOrigin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetOrigin {
    pub target: usize,
    pub arrow_id: usize,
}

impl QuiverDatum {
    pub fn new(
        source_dims: Vec<usize>,
        target_dims: Vec<usize>,
        arrows: Vec<(usize, usize, RatMatrix)>,
        inv_exponents: Vec<Rat>,
    ) -> Self {
        let arrows = arrows
            .into_iter()
            .enumerate()
            .map(|(id, (source, target, matrix))| Arrow {
                id,
                source,
                target,
                matrix,
            })
            .collect();
        QuiverDatum {
            source_dims,
            target_dims,
            arrows,
            inv_exponents,
        }
    }

    pub fn num_sources(&self) -> usize {
        self.source_dims.len()
    }

    pub fn num_targets(&self) -> usize {
        self.target_dims.len()
    }

    pub fn source_dim(&self, i: usize) -> usize {
        self.source_dims[i]
    }

    pub fn target_dim(&self, j: usize) -> usize {
        self.target_dims[j]
    }

    pub fn source_dims(&self) -> &[usize] {
        &self.source_dims
    }

    pub fn target_dims(&self) -> &[usize] {
        &self.target_dims
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn inv_exponent(&self, j: usize) -> &Rat {
        &self.inv_exponents[j]
    }

    pub fn inv_exponents(&self) -> &[Rat] {
        &self.inv_exponents
    }

    pub fn arrows_from(&self, source: usize) -> impl Iterator<Item = &Arrow> {
        self.arrows.iter().filter(move |a| a.source == source)
    }

    pub fn arrows_between(&self, source: usize, target: usize) -> impl Iterator<Item = &Arrow> {
        self.arrows
            .iter()
            .filter(move |a| a.source == source && a.target == target)
    }

    /// Structural validity: positive dimensions, arrows with in-range
    /// endpoints and full row rank matrices of the right shape, no isolated
    /// vertices, inverse exponents in [0, 1].
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut push = |code, location: String, message: String| {
            report.violations.push(Violation {
                code,
                location,
                message,
            });
        };

        if self.source_dims.is_empty() {
            push(
                "empty-sources",
                "sources".to_string(),
                "datum has no source vertices".to_string(),
            );
        }
        if self.target_dims.is_empty() {
            push(
                "empty-targets",
                "targets".to_string(),
                "datum has no target vertices".to_string(),
            );
        }
        for (i, &d) in self.source_dims.iter().enumerate() {
            if d == 0 {
                push(
                    "zero-dimension",
                    format!("sources[{}]", i + 1),
                    "source dimension must be positive".to_string(),
                );
            }
        }
        for (j, &e) in self.target_dims.iter().enumerate() {
            if e == 0 {
                push(
                    "zero-dimension",
                    format!("targets[{}]", j + 1),
                    "target dimension must be positive".to_string(),
                );
            }
        }
        if self.inv_exponents.len() != self.target_dims.len() {
            push(
                "exponent-count",
                "targets".to_string(),
                format!(
                    "{} exponents for {} targets",
                    self.inv_exponents.len(),
                    self.target_dims.len()
                ),
            );
        }
        for (j, w) in self.inv_exponents.iter().enumerate() {
            if !check_unit_interval(w) {
                push(
                    "exponent-out-of-range",
                    format!("targets[{}]", j + 1),
                    format!(
                        "inverse exponent {} outside [0, 1] (p must be >= 1)",
                        rational_to_string(w)
                    ),
                );
            }
        }

        let mut source_used = vec![false; self.source_dims.len()];
        let mut target_used = vec![false; self.target_dims.len()];
        for a in &self.arrows {
            let loc = format!("arrows[{}]", a.id + 1);
            if a.source >= self.source_dims.len() {
                push(
                    "vertex-out-of-range",
                    loc.clone(),
                    format!("source {} does not exist", a.source + 1),
                );
                continue;
            }
            if a.target >= self.target_dims.len() {
                push(
                    "vertex-out-of-range",
                    loc.clone(),
                    format!("target {} does not exist", a.target + 1),
                );
                continue;
            }
            source_used[a.source] = true;
            target_used[a.target] = true;
            let (e, d) = (self.target_dims[a.target], self.source_dims[a.source]);
            if a.matrix.rows() != e || a.matrix.cols() != d {
                push(
                    "bad-shape",
                    loc.clone(),
                    format!(
                        "matrix is {}x{}, expected {}x{}",
                        a.matrix.rows(),
                        a.matrix.cols(),
                        e,
                        d
                    ),
                );
                continue;
            }
            if e > 0 && d > 0 && a.matrix.rank() != e {
                push(
                    "not-surjective",
                    loc.clone(),
                    format!("matrix has rank {}, expected full row rank {}", a.matrix.rank(), e),
                );
            }
        }
        for (i, used) in source_used.iter().enumerate() {
            if !used && i < self.source_dims.len() {
                push(
                    "isolated-vertex",
                    format!("sources[{}]", i + 1),
                    "no arrow leaves this source".to_string(),
                );
            }
        }
        for (j, used) in target_used.iter().enumerate() {
            if !used && j < self.target_dims.len() {
                push(
                    "isolated-vertex",
                    format!("targets[{}]", j + 1),
                    "no arrow enters this target".to_string(),
                );
            }
        }
        report
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.ok() {
            Ok(())
        } else {
            Err(Error::InvalidDatum { report })
        }
    }

    /// Number of arrows into target `j`.
    pub fn alpha(&self, j: usize) -> Result<usize> {
        if j >= self.target_dims.len() {
            return Err(Error::IndexOutOfRange {
                kind: "target",
                index: j,
                len: self.target_dims.len(),
            });
        }
        Ok(self.arrows.iter().filter(|a| a.target == j).count())
    }

    pub fn alphas(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.target_dims.len()];
        for a in &self.arrows {
            if a.target < counts.len() {
                counts[a.target] += 1;
            }
        }
        counts
    }

    /// Exact exponent of the normalization constant:
    /// log C = sum_j alpha_j * w_j * e_j * log(alpha_j).
    pub fn log_c_constant(&self) -> f64 {
        let alphas = self.alphas();
        let mut acc = 0.0;
        for (j, &alpha) in alphas.iter().enumerate() {
            if alpha <= 1 {
                continue;
            }
            let coeff = crate::numerics::rat_to_f64(self.inv_exponent(j))
                * alpha as f64
                * self.target_dims[j] as f64;
            acc += coeff * (alpha as f64).ln();
        }
        acc
    }

    /// C = prod_j alpha_j^(alpha_j w_j e_j); equals 1 on subspace quivers.
    pub fn c_constant(&self) -> f64 {
        self.log_c_constant().exp()
    }

    /// True when the datum is a subspace quiver: one source and alpha_j = 1
    /// for every target.
    pub fn is_subspace_quiver(&self) -> bool {
        self.num_sources() == 1 && self.alphas().iter().all(|&a| a == 1)
    }

    /// Exact scaling sums: (sum_i d_i, sum_j alpha_j w_j e_j).
    pub fn scaling_sums(&self) -> (Rat, Rat) {
        let lhs = self
            .source_dims
            .iter()
            .fold(Rat::zero(), |acc, &d| acc + Rat::from_integer(d.into()));
        let alphas = self.alphas();
        let rhs = alphas
            .iter()
            .zip(self.inv_exponents.iter())
            .zip(self.target_dims.iter())
            .fold(Rat::zero(), |acc, ((&alpha, w), &e)| {
                acc + w * Rat::from_integer((alpha * e).into())
            });
        (lhs, rhs)
    }

    /// Splits the datum into one subspace quiver per source: each arrow's
    /// target is duplicated into a fresh vertex carrying the same inverse
    /// exponent. The constant for the whole datum is the product of the
    /// constants of the parts.
    pub fn split_sources(&self) -> Result<Vec<SplitPart>> {
        self.ensure_valid()?;
        let mut parts = Vec::with_capacity(self.num_sources());
        for i in 0..self.num_sources() {
            let mut target_dims = Vec::new();
            let mut inv_exponents = Vec::new();
            let mut arrows = Vec::new();
            let mut origins = Vec::new();
            for a in self.arrows_from(i) {
                let new_target = target_dims.len();
                target_dims.push(self.target_dims[a.target]);
                inv_exponents.push(self.inv_exponents[a.target].clone());
                arrows.push((0usize, new_target, a.matrix.clone()));
                origins.push(TargetOrigin {
                    target: a.target,
                    arrow_id: a.id,
                });
            }
            parts.push(SplitPart {
                source: i,
                datum: QuiverDatum::new(
                    vec![self.source_dims[i]],
                    target_dims,
                    arrows,
                    inv_exponents,
                ),
                origins,
            });
        }
        Ok(parts)
    }
}

/// Conventional inverse exponent display: "inf" for w = 0, else `1/w`.
pub fn exponent_to_string(w: &Rat) -> String {
    if w.is_zero() {
        "inf".to_string()
    } else {
        rational_to_string(&(Rat::one() / w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::exact::{rat_frac, rat_int};

    /// Two coordinate projections from a 3-space onto overlapping planes,
    /// both exponents 4/3.
    pub fn overlapping_projections() -> QuiverDatum {
        QuiverDatum::new(
            vec![3],
            vec![2],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[1, 0, 0], &[0, 1, 0]])),
                (0, 0, RatMatrix::from_i64_rows(&[&[0, 1, 0], &[0, 0, 1]])),
            ],
            vec![rat_frac(3, 4)],
        )
    }

    #[test]
    fn valid_datum_passes() {
        let d = overlapping_projections();
        assert!(d.validate().ok());
        assert_eq!(d.alpha(0).unwrap(), 2);
        assert_eq!(d.alphas(), vec![2]);
    }

    #[test]
    fn exponent_out_of_range_is_flagged() {
        let mut d = overlapping_projections();
        d.inv_exponents = vec![rat_frac(3, 2)];
        let report = d.validate();
        assert!(!report.ok());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].code, "exponent-out-of-range");
        assert_eq!(report.violations[0].location, "targets[1]");
    }

    #[test]
    fn rank_deficient_arrow_is_flagged() {
        let d = QuiverDatum::new(
            vec![2],
            vec![2],
            vec![(0, 0, RatMatrix::from_i64_rows(&[&[1, 0], &[2, 0]]))],
            vec![rat_int(1)],
        );
        let report = d.validate();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].code, "not-surjective");
    }

    #[test]
    fn shape_mismatch_and_isolated_vertices_are_flagged() {
        let d = QuiverDatum::new(
            vec![2, 2],
            vec![1, 1],
            vec![(0, 0, RatMatrix::from_i64_rows(&[&[1, 0, 0]]))],
            vec![rat_int(1), rat_int(1)],
        );
        let report = d.validate();
        let codes: Vec<_> = report.violations.iter().map(|v| v.code).collect();
        assert!(codes.contains(&"bad-shape"));
        assert!(codes.contains(&"isolated-vertex"));
    }

    #[test]
    fn out_of_range_arrow_is_flagged() {
        let d = QuiverDatum::new(
            vec![1],
            vec![1],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[1]])),
                (0, 5, RatMatrix::from_i64_rows(&[&[1]])),
            ],
            vec![rat_int(1)],
        );
        let report = d.validate();
        assert_eq!(report.violations[0].code, "vertex-out-of-range");
        assert_eq!(report.violations[0].location, "arrows[2]");
    }

    #[test]
    fn scaling_sums_are_exact() {
        let d = overlapping_projections();
        let (lhs, rhs) = d.scaling_sums();
        // 3 = 2 * (3/4) * 2
        assert_eq!(lhs, rat_int(3));
        assert_eq!(rhs, rat_int(3));
    }

    #[test]
    fn c_constant_of_overlapping_projections_is_eight() {
        let d = overlapping_projections();
        // alpha = 2, w = 3/4, e = 2: C = 2^(2 * 3/4 * 2) = 8.
        assert!((d.c_constant() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn c_constant_is_one_on_subspace_quivers() {
        let d = QuiverDatum::new(
            vec![2],
            vec![1, 1],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[1, 0]])),
                (0, 1, RatMatrix::from_i64_rows(&[&[0, 1]])),
            ],
            vec![rat_int(1), rat_int(1)],
        );
        assert!(d.is_subspace_quiver());
        assert_eq!(d.c_constant(), 1.0);
    }

    #[test]
    fn split_duplicates_targets_per_arrow() {
        let d = overlapping_projections();
        let parts = d.split_sources().unwrap();
        assert_eq!(parts.len(), 1);
        let part = &parts[0];
        assert_eq!(part.datum.num_targets(), 2);
        assert!(part.datum.is_subspace_quiver());
        assert!(part.datum.validate().ok());
        assert_eq!(part.datum.inv_exponent(0), &rat_frac(3, 4));
        assert_eq!(part.datum.inv_exponent(1), &rat_frac(3, 4));
        assert_eq!(part.origins[0].arrow_id, 0);
        assert_eq!(part.origins[1].arrow_id, 1);
        // Arrow matrices are carried over unchanged.
        assert_eq!(part.datum.arrows()[0].matrix, d.arrows()[0].matrix);
    }

    #[test]
    fn split_rejects_invalid_datum() {
        let mut d = overlapping_projections();
        d.inv_exponents = vec![rat_int(2)];
        assert!(matches!(
            d.split_sources(),
            Err(Error::InvalidDatum { .. })
        ));
    }

    #[test]
    fn exponent_display() {
        assert_eq!(exponent_to_string(&rat_int(0)), "inf");
        assert_eq!(exponent_to_string(&rat_frac(3, 4)), "4/3");
        assert_eq!(exponent_to_string(&rat_int(1)), "1");
    }
}
