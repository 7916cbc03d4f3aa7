//! Discrete Cantor-set models and partition metrics: a clopen partition with
//! small blocks, and a metric whose blocks are scaled copies of a seed metric
//! while cross-block distances equal sup-distances of the reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{
    check_proportional, diameter, restrict, sup_distance, validate_metric, FiniteMetricSpace,
    Proportionality, SubsetMask,
};
use crate::report::{CertificateEntry, CertificateReport};
use crate::scalar::Scalar;

pub const MAX_CANTOR_LEVEL: u32 = 16;

/// Finite truncation of the binary Cantor space: all addresses of a given
/// length, embedded in the line by the middle-thirds coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CantorModel<S> {
    level: u32,
    coords: Vec<S>,
    space: FiniteMetricSpace<S>,
}

impl<S: Scalar> CantorModel<S> {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Embedded coordinate of each address, in address order.
    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    /// The induced `|x - y|` metric space; labels are the binary addresses.
    pub fn space(&self) -> &FiniteMetricSpace<S> {
        &self.space
    }

    pub fn addresses(&self) -> Vec<String> {
        self.space.labels().to_vec()
    }
}

/// Wire format for a Cantor model: the level plus the address list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorModelFile {
    pub level: u32,
    pub addresses: Vec<String>,
}

impl<S: Scalar> From<&CantorModel<S>> for CantorModelFile {
    fn from(model: &CantorModel<S>) -> Self {
        CantorModelFile {
            level: model.level,
            addresses: model.addresses(),
        }
    }
}

impl CantorModelFile {
    /// Rebuild the model; the stored addresses must match the level's full
    /// address enumeration.
    pub fn into_model<S: Scalar>(self) -> Result<CantorModel<S>> {
        let model = build_cantor_model::<S>(self.level)?;
        if model.addresses() != self.addresses {
            return Err(Error::Parse {
                line: 0,
                message: "address list does not match the level enumeration".to_string(),
            });
        }
        Ok(model)
    }
}

/// Build the level-`level` model: `2^level` addresses, coordinate
/// `sum of 2 a_i / 3^i` with the first letter most significant.
pub fn build_cantor_model<S: Scalar>(level: u32) -> Result<CantorModel<S>> {
    if level < 1 || level > MAX_CANTOR_LEVEL {
        return Err(Error::LevelOutOfRange { level });
    }
    let count = 1usize << level;
    let three = S::of(3.0);
    let two = S::of(2.0);
    let mut labels = Vec::with_capacity(count);
    let mut coords = Vec::with_capacity(count);
    for a in 0..count {
        let mut label = String::with_capacity(level as usize);
        let mut coord = S::zero();
        let mut power = S::one();
        for bit_pos in (0..level).rev() {
            let bit = (a >> bit_pos) & 1;
            label.push(if bit == 1 { '1' } else { '0' });
            power = power / three;
            if bit == 1 {
                coord = coord + two * power;
            }
        }
        labels.push(label);
        coords.push(coord);
    }
    let space = FiniteMetricSpace::from_line_coords(labels, &coords)?;
    Ok(CantorModel {
        level,
        coords,
        space,
    })
}

/// A partition of `{0, .., n-1}` into disjoint non-empty blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionWire")]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct PartitionWire {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<PartitionWire> for Partition {
    type Error = Error;

    fn try_from(wire: PartitionWire) -> Result<Self> {
        Partition::new(wire.n, wire.blocks)
    }
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        if blocks.is_empty() {
            return Err(Error::InvalidPartition {
                detail: "no blocks".to_string(),
            });
        }
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition {
                    detail: format!("block {b} is empty"),
                });
            }
            for &i in block {
                if i >= n {
                    return Err(Error::InvalidPartition {
                        detail: format!("index {i} out of range in block {b}"),
                    });
                }
                if seen[i] {
                    return Err(Error::InvalidPartition {
                        detail: format!("index {i} appears twice"),
                    });
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidPartition {
                detail: "blocks do not cover the point set".to_string(),
            });
        }
        Ok(Partition { n, blocks })
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block index of each point.
    pub fn block_of(&self) -> Vec<usize> {
        let mut owner = vec![0usize; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                owner[i] = b;
            }
        }
        owner
    }

    pub fn block_mask<S: Scalar>(
        &self,
        space: &FiniteMetricSpace<S>,
        b: usize,
    ) -> Result<SubsetMask> {
        SubsetMask::new(space, self.blocks[b].iter().copied())
    }
}

/// Split contiguous index ranges at their midpoint until every block has
/// diameter `< eps / 2`.
///
/// On a Cantor model (points in address order, size a power of two) the
/// midpoint splits are exactly address-prefix refinements, so blocks are
/// prefix classes and hence clopen in the model's topology.
pub fn partition_by_diameter<S: Scalar>(
    m: &FiniteMetricSpace<S>,
    eps: S,
) -> Result<Partition> {
    if !eps.is_finite() || eps <= S::zero() {
        return Err(Error::EpsOutOfRange {
            requirement: "eps > 0".to_string(),
            value: eps.to_f64().unwrap_or(f64::NAN),
        });
    }
    let threshold = eps / S::of(2.0);
    let n = m.len();
    let mut ranges = vec![(0usize, n)];
    let mut done = Vec::new();
    while let Some((lo, hi)) = ranges.pop() {
        let mut diam = S::zero();
        for i in lo..hi {
            for j in (i + 1)..hi {
                let d = m.dist(i, j);
                if d > diam {
                    diam = d;
                }
            }
        }
        if diam < threshold {
            done.push((lo, hi));
        } else {
            let mid = lo + (hi - lo) / 2;
            ranges.push((mid, hi));
            ranges.push((lo, mid));
        }
    }
    done.sort_unstable();
    let blocks = done
        .into_iter()
        .map(|(lo, hi)| (lo..hi).collect())
        .collect();
    Partition::new(n, blocks)
}

/// A partition metric: scaled copies of the seed inside blocks, reference
/// sup-distances across blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PartitionedCantorMetric<S> {
    pub space: FiniteMetricSpace<S>,
    pub partition: Partition,
    pub block_scales: Vec<S>,
    pub seed: FiniteMetricSpace<S>,
    /// Seed point assigned to each block member, block by block, in the
    /// block's sorted point order.
    pub seed_assignment: Vec<Vec<usize>>,
}

/// Margin factor turning the strict target inequalities into enforceable
/// bounds when choosing block scales.
const SCALE_MARGIN: f64 = 0.99;

/// Build the partition metric over `reference`'s point set.
///
/// Cross-block entries are the reference sup-distances. Inside block `i` the
/// entries are `c_i` times the seed restricted to the first `|block|` seed
/// points (order-preserving assignment), with `c_i` chosen so that the
/// sup-distance to the reference stays below `eps` and the within-block
/// diameter stays below twice the nearest cross-block sup-distance, which
/// makes the triangle inequality hold.
pub fn build_dk<S: Scalar>(
    reference: &FiniteMetricSpace<S>,
    partition: &Partition,
    seed: &FiniteMetricSpace<S>,
    eps: S,
) -> Result<PartitionedCantorMetric<S>> {
    let n = reference.len();
    if partition.point_count() != n {
        return Err(Error::SizeMismatch {
            left: partition.point_count(),
            right: n,
        });
    }
    if !eps.is_finite() || eps <= S::zero() {
        return Err(Error::EpsOutOfRange {
            requirement: "eps > 0".to_string(),
            value: eps.to_f64().unwrap_or(f64::NAN),
        });
    }
    let seed_report = validate_metric(seed);
    if !seed_report.is_metric() {
        return Err(Error::ConstructionInvalid {
            detail: format!("seed metric invalid: {}", seed_report.summary()),
        });
    }

    let m = partition.block_count();
    let blocks = partition.blocks();

    // Sup-distances between blocks under the reference metric.
    let mut cross = vec![vec![S::zero(); m]; m];
    for bi in 0..m {
        for bj in (bi + 1)..m {
            let mut worst = S::zero();
            for &x in &blocks[bi] {
                for &y in &blocks[bj] {
                    let d = reference.dist(x, y);
                    if d > worst {
                        worst = d;
                    }
                }
            }
            cross[bi][bj] = worst;
            cross[bj][bi] = worst;
        }
    }

    let margin = S::of(SCALE_MARGIN);
    let two = S::of(2.0);
    let mut scales = Vec::with_capacity(m);
    let mut assignments = Vec::with_capacity(m);
    for (bi, block) in blocks.iter().enumerate() {
        let size = block.len();
        if size > seed.len() {
            return Err(Error::SeedTooSmall {
                block: bi,
                needed: size,
                available: seed.len(),
            });
        }
        let assignment: Vec<usize> = (0..size).collect();

        let mut gap = S::zero();
        for (ai, &x) in block.iter().enumerate() {
            for &y in block.iter().skip(ai + 1) {
                let d = reference.dist(x, y);
                if d > gap {
                    gap = d;
                }
            }
        }
        if gap >= eps {
            return Err(Error::InfeasibleScaling {
                block: bi,
                constraint: format!(
                    "block diameter {gap} >= eps {eps}: sup-norm target unreachable"
                ),
            });
        }

        if size == 1 {
            scales.push(S::one());
            assignments.push(assignment);
            continue;
        }

        let mut seed_diam = S::zero();
        for i in 0..size {
            for j in (i + 1)..size {
                let d = seed.dist(assignment[i], assignment[j]);
                if d > seed_diam {
                    seed_diam = d;
                }
            }
        }
        if seed_diam <= S::zero() {
            return Err(Error::InfeasibleScaling {
                block: bi,
                constraint: "assigned seed points have zero diameter".to_string(),
            });
        }

        let mut limit = (eps - gap) / seed_diam;
        if m > 1 {
            let min_cross = (0..m)
                .filter(|&bj| bj != bi)
                .map(|bj| cross[bi][bj])
                .fold(S::infinity(), |acc, d| acc.min(d));
            limit = limit.min(two * min_cross / seed_diam);
        }
        let scale = margin * limit;
        if scale <= S::zero() {
            return Err(Error::InfeasibleScaling {
                block: bi,
                constraint: "non-positive scale".to_string(),
            });
        }
        scales.push(scale);
        assignments.push(assignment);
    }

    let owner = partition.block_of();
    let mut position_in_block = vec![0usize; n];
    for block in blocks {
        for (pos, &x) in block.iter().enumerate() {
            position_in_block[x] = pos;
        }
    }

    let mut dist = vec![S::zero(); n * n];
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let (bx, by) = (owner[x], owner[y]);
            let value = if bx == by {
                let sx = assignments[bx][position_in_block[x]];
                let sy = assignments[bx][position_in_block[y]];
                scales[bx] * seed.dist(sx, sy)
            } else {
                cross[bx][by]
            };
            dist[x * n + y] = value;
        }
    }
    let space = FiniteMetricSpace::new(
        reference.labels().to_vec(),
        dist,
        reference.base_point(),
    )?;

    Ok(PartitionedCantorMetric {
        space,
        partition: partition.clone(),
        block_scales: scales,
        seed: seed.clone(),
        seed_assignment: assignments,
    })
}

/// Re-measure every bound the partition metric promises, independent of how
/// it was constructed.
pub fn certify_partition_metric<S: Scalar>(
    pm: &PartitionedCantorMetric<S>,
    reference: &FiniteMetricSpace<S>,
    eps: S,
) -> Result<CertificateReport<S>> {
    let n = reference.len();
    if pm.space.len() != n || pm.partition.point_count() != n {
        return Err(Error::SizeMismatch {
            left: pm.space.len(),
            right: n,
        });
    }
    let tol = S::tol_metric();
    let mut entries = Vec::new();

    // sup |d_K - d| < eps
    let mut sup = S::zero();
    let mut sup_pair = (0, 0);
    for i in 0..n {
        for j in 0..n {
            let gap = (pm.space.dist(i, j) - reference.dist(i, j)).abs();
            if gap > sup {
                sup = gap;
                sup_pair = (i, j);
            }
        }
    }
    entries.push(
        CertificateEntry::less_than("partition.sup_norm", "sup |d_K - d| < eps", sup, eps)
            .with_detail(format!("worst pair ({}, {})", sup_pair.0, sup_pair.1)),
    );

    // every block diameter < eps / 2 under the reference metric
    let owner = pm.partition.block_of();
    let mut worst_diam = S::zero();
    let mut worst_block = 0;
    for (b, block) in pm.partition.blocks().iter().enumerate() {
        let mask = SubsetMask::new(reference, block.iter().copied())?;
        let d = diameter(reference, &mask)?;
        if d > worst_diam {
            worst_diam = d;
            worst_block = b;
        }
    }
    entries.push(
        CertificateEntry::less_than(
            "partition.block_diameter",
            "max block diameter < eps / 2",
            worst_diam,
            eps / S::of(2.0),
        )
        .with_detail(format!("worst block {worst_block}")),
    );

    // cross-block identity d_K(x, y) == sup-distance of the blocks, bit-exact
    let mut cross_dev = S::zero();
    let mut cross_pair = (0, 0);
    for x in 0..n {
        for y in 0..n {
            if owner[x] == owner[y] {
                continue;
            }
            let bx = pm.partition.block_mask(reference, owner[x])?;
            let by = pm.partition.block_mask(reference, owner[y])?;
            let expected = sup_distance(reference, &bx, &by)?;
            let dev = (pm.space.dist(x, y) - expected).abs();
            if dev > cross_dev {
                cross_dev = dev;
                cross_pair = (x, y);
            }
        }
    }
    entries.push(
        CertificateEntry::exact_zero(
            "partition.cross_identity",
            "d_K(x, y) == D(K_i, K_j) across blocks",
            cross_dev,
        )
        .with_detail(format!("worst pair ({}, {})", cross_pair.0, cross_pair.1)),
    );

    // each block is a scaled copy of its assigned seed points
    let mut prop_dev = S::zero();
    let mut prop_detail = String::from("all blocks proportional");
    for (b, block) in pm.partition.blocks().iter().enumerate() {
        let block_mask = SubsetMask::new(&pm.space, block.iter().copied())?;
        let block_space = restrict(&pm.space, &block_mask)?;
        let seed_mask = SubsetMask::new(&pm.seed, pm.seed_assignment[b].iter().copied())?;
        let seed_space = restrict(&pm.seed, &seed_mask)?;
        match check_proportional(&block_space, &seed_space)? {
            Proportionality::Proportional { scale } => {
                let dev = (scale - pm.block_scales[b]).abs();
                if dev > prop_dev {
                    prop_dev = dev;
                    prop_detail = format!("block {b}: scale {scale} vs recorded {}", pm.block_scales[b]);
                }
            }
            Proportionality::Mismatch {
                deviation, from, to, ..
            } => {
                if deviation > prop_dev {
                    prop_dev = deviation;
                    prop_detail = format!("block {b}: pair ({from}, {to}) deviates");
                }
            }
        }
    }
    entries.push(
        CertificateEntry::at_most(
            "partition.proportionality",
            "each block equals scale * seed within tolerance",
            prop_dev,
            tol,
            S::zero(),
        )
        .with_detail(prop_detail),
    );

    // full metric validation
    let report = validate_metric(&pm.space);
    let axiom_failures = report.triangle_violations.len()
        + usize::from(!report.symmetry_ok)
        + usize::from(!report.diagonal_ok)
        + usize::from(!report.positivity_ok);
    entries.push(
        CertificateEntry::exact_zero(
            "partition.metric_axioms",
            "d_K passes the exhaustive axiom scan",
            S::from_usize(axiom_failures).unwrap_or_else(S::one),
        )
        .with_detail(report.summary()),
    );

    Ok(CertificateReport::from_entries(entries))
}
