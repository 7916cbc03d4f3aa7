//! Configuration-driven end-to-end runner: build or load an ambient space
//! with a marked Cantor-type subset, construct the partition metric, glue,
//! extend, and consolidate every certificate into one report. Runs are
//! deterministic in the configured seed, and reports carry no wall-clock
//! data so reruns are bit-identical.

use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cantor::{
    build_cantor_model, build_dk, certify_partition_metric, partition_by_diameter,
    PartitionedCantorMetric,
};
use crate::error::{Error, Result};
use crate::extend::{
    build_dugundji_system, build_extended_metric, certify_cover, eps_upper_bound,
    extend_function, extension_operator_norm, sample_lipschitz_vertex, DugundjiSystem,
    ExtensionResult,
};
use crate::free::{dual_witness, free_space_norm, SignedMeasure};
use crate::glue::{build_dc, carve_c, certify_dc, GluedMetric};
use crate::io::{load_space, save_json};
use crate::metric::{
    default_labels, point_to_set_distance, restrict, rho_distance, validate_metric,
    FiniteMetricSpace, SubsetMask,
};
use crate::report::{CertificateEntry, CertificateReport};
use crate::scalar::Scalar;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "LIPFREE_OUT_DIR";

pub const MAX_HALO: usize = 30;

/// Where the ambient space comes from. Only composite and file sources mark
/// the embedded subset the pipeline needs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "S: Scalar")]
pub enum AmbientSource<S> {
    /// Uniform grid on `[0, length]` with line distances. No marked subset.
    Grid { n: usize, length: S },
    /// Shortest-path closure of random symmetric weights. No marked subset.
    RandomClosure { n: usize, weight_min: S, weight_max: S },
    /// Grid plus an embedded scaled Cantor model past a gap, plus `halo`
    /// points strictly inside the carving distance of the model.
    CompositeGrid {
        n: usize,
        length: S,
        gap: S,
        halo: usize,
        /// Scale of the embedded model; defaults to `4 * eps`.
        #[serde(default)]
        k_scale: Option<S>,
    },
    /// Random shortest-path cluster joined to the Cantor-plus-halo line at a
    /// gap (junction distances `gap + d(u, u0) + d(z, z0)`).
    CompositeRandom {
        n: usize,
        gap: S,
        halo: usize,
        weight_min: S,
        weight_max: S,
        #[serde(default)]
        k_scale: Option<S>,
    },
    /// External file; the subset mask is required to run the pipeline.
    File {
        path: PathBuf,
        #[serde(default)]
        k_mask: Option<Vec<usize>>,
    },
}

/// Seed metric the partition blocks are scaled copies of.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedMetric {
    /// Middle-thirds model at the configured level (the default).
    MiddleThirds,
    File { path: PathBuf },
}

/// Sampling effort knobs for the certificate scans.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckSettings {
    /// Random unit-ball vertices added to the operator-norm family.
    #[serde(default = "default_operator_samples")]
    pub operator_norm_samples: usize,
    /// Random unit-ball vertices for the anchored extension bound.
    #[serde(default = "default_ball_samples")]
    pub unit_ball_samples: usize,
}

fn default_operator_samples() -> usize {
    200
}

fn default_ball_samples() -> usize {
    500
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            operator_norm_samples: default_operator_samples(),
            unit_ball_samples: default_ball_samples(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PipelineConfig<S> {
    pub ambient: AmbientSource<S>,
    pub cantor_level: u32,
    pub eps: S,
    #[serde(default = "default_seed_metric")]
    pub seed_metric: SeedMetric,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub checks: CheckSettings,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_seed_metric() -> SeedMetric {
    SeedMetric::MiddleThirds
}

impl<S: Scalar> PipelineConfig<S> {
    /// Composite-grid defaults useful for quick runs and tests.
    pub fn composite_grid(n: usize, cantor_level: u32, eps: S, rng_seed: u64) -> Self {
        PipelineConfig {
            ambient: AmbientSource::CompositeGrid {
                n,
                length: S::one(),
                gap: S::of(0.5),
                halo: 4,
                k_scale: None,
            },
            cantor_level,
            eps,
            seed_metric: SeedMetric::MiddleThirds,
            out_dir: None,
            checks: CheckSettings::default(),
            rng_seed,
        }
    }

    pub fn composite_random(n: usize, cantor_level: u32, eps: S, rng_seed: u64) -> Self {
        PipelineConfig {
            ambient: AmbientSource::CompositeRandom {
                n,
                gap: S::of(0.5),
                halo: 4,
                weight_min: S::of(1.0),
                weight_max: S::of(2.0),
                k_scale: None,
            },
            cantor_level,
            eps,
            seed_metric: SeedMetric::MiddleThirds,
            out_dir: None,
            checks: CheckSettings::default(),
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eps.is_finite() || self.eps <= S::zero() || self.eps >= eps_upper_bound::<S>() {
            return Err(Error::EpsOutOfRange {
                requirement: "eps strictly inside (0, 1/13)".to_string(),
                value: self.eps.to_f64().unwrap_or(f64::NAN),
            });
        }
        if self.cantor_level < 1 || self.cantor_level > crate::cantor::MAX_CANTOR_LEVEL {
            return Err(Error::LevelOutOfRange {
                level: self.cantor_level,
            });
        }
        let k_points = 1usize << self.cantor_level;
        match &self.ambient {
            AmbientSource::CompositeGrid { n, gap, halo, .. }
            | AmbientSource::CompositeRandom { n, gap, halo, .. } => {
                if *halo > MAX_HALO {
                    return Err(Error::ConfigInvalid(format!(
                        "halo {halo} exceeds the limit {MAX_HALO}"
                    )));
                }
                if *n < k_points + halo + 2 {
                    return Err(Error::ConfigInvalid(format!(
                        "n = {n} too small for 2^level + halo + 2 = {}",
                        k_points + halo + 2
                    )));
                }
                if *gap <= self.eps {
                    return Err(Error::ConfigInvalid(
                        "gap must exceed eps so the far cluster survives carving".to_string(),
                    ));
                }
            }
            AmbientSource::Grid { n, .. } | AmbientSource::RandomClosure { n, .. } => {
                if *n < 2 {
                    return Err(Error::ConfigInvalid("need at least 2 points".to_string()));
                }
            }
            AmbientSource::File { .. } => {}
        }
        Ok(())
    }
}

/// Uniform grid on `[0, length]`.
pub fn generate_grid<S: Scalar>(n: usize, length: S) -> Result<FiniteMetricSpace<S>> {
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    let coords: Vec<S> = if n == 1 {
        vec![S::zero()]
    } else {
        (0..n)
            .map(|i| length * S::from_usize(i).unwrap() / S::from_usize(n - 1).unwrap())
            .collect()
    };
    FiniteMetricSpace::from_line_coords(default_labels(n), &coords)
}

/// Shortest-path closure of uniform random symmetric weights; always a valid
/// metric because the weights are strictly positive.
pub fn generate_random_closure<S: Scalar>(
    n: usize,
    weight_min: S,
    weight_max: S,
    rng: &mut impl Rng,
) -> Result<FiniteMetricSpace<S>> {
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    let lo = weight_min.to_f64().unwrap_or(0.5);
    let hi = weight_max.to_f64().unwrap_or(2.0).max(lo + 1e-9);
    let mut d = vec![S::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = S::of(rng.gen_range(lo..hi));
            d[i * n + j] = w;
            d[j * n + i] = w;
        }
    }
    for via in 0..n {
        for i in 0..n {
            for j in 0..n {
                let detour = d[i * n + via] + d[via * n + j];
                if i != j && detour < d[i * n + j] {
                    d[i * n + j] = detour;
                }
            }
        }
    }
    FiniteMetricSpace::new(default_labels(n), d, 0)
}

/// Coordinates of the Cantor-plus-halo cluster, relative to `offset`:
/// the scaled model first, then halo points strictly within `eps` of it.
///
/// Halo slots cycle through four placements: past the left edge, past the
/// right edge, and the two sides of the model's central gap. The gap pair
/// sits inside each other's cover balls while anchoring to opposite halves,
/// so extended values genuinely mix distant anchors.
fn cantor_halo_coords<S: Scalar>(
    level: u32,
    scale: S,
    offset: S,
    halo: usize,
    eps: S,
) -> Result<Vec<S>> {
    let model = build_cantor_model::<S>(level)?;
    let mut coords: Vec<S> = model
        .coords()
        .iter()
        .map(|&c| offset + scale * c)
        .collect();
    let right_edge = offset + scale * model.coords()[model.coords().len() - 1];
    let gap_center = offset + scale / S::of(2.0);
    for j in 0..halo {
        let step = (j / 4) as f64;
        let edge_off = S::of(0.3 + 0.04 * step) * eps;
        let gap_off = S::of(0.024 + 0.003 * step) * scale;
        coords.push(match j % 4 {
            0 => offset - edge_off,
            1 => right_edge + edge_off,
            2 => gap_center - gap_off,
            _ => gap_center + gap_off,
        });
    }
    Ok(coords)
}

/// Build the ambient space and, for sources that mark one, the embedded
/// subset mask.
pub fn build_ambient<S: Scalar>(
    config: &PipelineConfig<S>,
    rng: &mut impl Rng,
) -> Result<(FiniteMetricSpace<S>, Option<SubsetMask>)> {
    let level = config.cantor_level;
    let k_points = 1usize << level;
    match &config.ambient {
        AmbientSource::Grid { n, length } => Ok((generate_grid(*n, *length)?, None)),
        AmbientSource::RandomClosure {
            n,
            weight_min,
            weight_max,
        } => Ok((
            generate_random_closure(*n, *weight_min, *weight_max, rng)?,
            None,
        )),
        AmbientSource::CompositeGrid {
            n,
            length,
            gap,
            halo,
            k_scale,
        } => {
            let n_grid = n - k_points - halo;
            let scale = k_scale.unwrap_or(S::of(4.0) * config.eps);
            let mut coords: Vec<S> = if n_grid == 1 {
                vec![S::zero()]
            } else {
                (0..n_grid)
                    .map(|i| {
                        *length * S::from_usize(i).unwrap() / S::from_usize(n_grid - 1).unwrap()
                    })
                    .collect()
            };
            let offset = *length + *gap;
            coords.extend(cantor_halo_coords(level, scale, offset, *halo, config.eps)?);
            let space = FiniteMetricSpace::from_line_coords(default_labels(coords.len()), &coords)?;
            let k = SubsetMask::new(&space, n_grid..n_grid + k_points)?;
            Ok((space, Some(k)))
        }
        AmbientSource::CompositeRandom {
            n,
            gap,
            halo,
            weight_min,
            weight_max,
            k_scale,
        } => {
            let n1 = n - k_points - halo;
            let cluster = generate_random_closure(n1, *weight_min, *weight_max, rng)?;
            let scale = k_scale.unwrap_or(S::of(4.0) * config.eps);
            let line = cantor_halo_coords(level, scale, S::zero(), *halo, config.eps)?;
            let line_min = line.iter().copied().fold(S::infinity(), |a, b| a.min(b));
            let total = n1 + line.len();
            let mut d = vec![S::zero(); total * total];
            for i in 0..n1 {
                for j in 0..n1 {
                    d[i * total + j] = cluster.dist(i, j);
                }
            }
            for (zi, &cz) in line.iter().enumerate() {
                for (zj, &cw) in line.iter().enumerate() {
                    d[(n1 + zi) * total + (n1 + zj)] = (cz - cw).abs();
                }
            }
            // Junction: gap + d(u, u0) + |z - z_min|; one-Lipschitz offsets on
            // both sides keep the triangle inequality.
            for u in 0..n1 {
                for (zi, &cz) in line.iter().enumerate() {
                    let v = *gap + cluster.dist(u, 0) + (cz - line_min);
                    d[u * total + (n1 + zi)] = v;
                    d[(n1 + zi) * total + u] = v;
                }
            }
            let space = FiniteMetricSpace::new(default_labels(total), d, 0)?;
            let k = SubsetMask::new(&space, n1..n1 + k_points)?;
            Ok((space, Some(k)))
        }
        AmbientSource::File { path, k_mask } => {
            let (space, report) = load_space::<S>(path)?;
            if !report.is_metric() {
                return Err(Error::ConstructionInvalid {
                    detail: format!("ambient file is not a metric: {}", report.summary()),
                });
            }
            let mask = match k_mask {
                Some(indices) => Some(SubsetMask::new(&space, indices.iter().copied())?),
                None => None,
            };
            Ok((space, mask))
        }
    }
}

fn seed_space<S: Scalar>(config: &PipelineConfig<S>) -> Result<FiniteMetricSpace<S>> {
    match &config.seed_metric {
        SeedMetric::MiddleThirds => Ok(build_cantor_model::<S>(config.cantor_level)?
            .space()
            .clone()),
        SeedMetric::File { path } => {
            let (space, report) = load_space::<S>(path)?;
            if !report.is_metric() {
                return Err(Error::ConstructionInvalid {
                    detail: format!("seed file is not a metric: {}", report.summary()),
                });
            }
            Ok(space)
        }
    }
}

/// Everything the pipeline built, for downstream inspection and tests.
#[derive(Clone, Debug)]
pub struct PipelineArtifacts<S> {
    pub ambient: FiniteMetricSpace<S>,
    pub k_mask: SubsetMask,
    pub reference: FiniteMetricSpace<S>,
    pub dk: PartitionedCantorMetric<S>,
    pub glued: GluedMetric<S>,
    pub system: DugundjiSystem<S>,
    pub extension: ExtensionResult<S>,
    pub operator_norm: S,
    pub rho_final: S,
}

/// Run the full construction and return the artifacts plus the consolidated
/// certificate report. Stage failures are wrapped with the stage name; when
/// an output directory is configured, the partial report is persisted before
/// the error propagates.
pub fn run_pipeline_full<S: Scalar>(
    config: &PipelineConfig<S>,
) -> Result<(PipelineArtifacts<S>, CertificateReport<S>)> {
    config.validate()?;
    let out_dir = resolve_out_dir(config);
    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut report = CertificateReport::<S>::default();
    let eps = config.eps;

    let result = (|| -> Result<PipelineArtifacts<S>> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

        let (ambient, k_mask) =
            build_ambient(config, &mut rng).map_err(|e| e.at_stage("ambient"))?;
        let k_mask = k_mask.ok_or_else(|| {
            Error::ConfigInvalid(
                "ambient source does not mark an embedded subset; use a composite source or supply k_mask"
                    .to_string(),
            )
            .at_stage("ambient")
        })?;
        let ambient_report = validate_metric(&ambient);
        if !ambient_report.is_metric() {
            return Err(Error::ConstructionInvalid {
                detail: format!("generated ambient invalid: {}", ambient_report.summary()),
            }
            .at_stage("ambient"));
        }

        let reference = restrict(&ambient, &k_mask).map_err(|e| e.at_stage("reference"))?;
        let partition =
            partition_by_diameter(&reference, eps).map_err(|e| e.at_stage("partition"))?;
        let seed = seed_space(config).map_err(|e| e.at_stage("seed_metric"))?;
        let dk = build_dk(&reference, &partition, &seed, eps)
            .map_err(|e| e.at_stage("partition_metric"))?;
        let dk_report = certify_partition_metric(&dk, &reference, eps)
            .map_err(|e| e.at_stage("certify_partition"))?;
        report.absorb(dk_report);

        let glued = build_dc(&ambient, &k_mask, &dk, eps).map_err(|e| e.at_stage("glue"))?;
        let dc_report = certify_dc(&glued, &ambient).map_err(|e| e.at_stage("certify_glue"))?;
        report.absorb(dc_report);

        let sys = build_dugundji_system(&ambient, &glued.c_mask, eps)
            .map_err(|e| e.at_stage("cover"))?;
        report.absorb(certify_cover(&sys));

        let extension =
            build_extended_metric(&sys, &glued.space).map_err(|e| e.at_stage("extension"))?;
        report.absorb(extension.certificates.clone());

        // Anchored extension bound over sampled unit-ball vertices.
        report.push(anchored_extension_bound(
            &sys,
            &glued.space,
            config.checks.unit_ball_samples,
            config.rng_seed ^ 0x5bd1_e995,
        )?);

        let operator_norm = extension_operator_norm(
            &extension,
            &sys,
            &glued.space,
            config.checks.operator_norm_samples,
            config.rng_seed ^ 0x9e37_79b9,
        )
        .map_err(|e| e.at_stage("operator_norm"))?;

        // Pipeline-level seams and the final budget.
        let mut worst_gap = S::zero();
        for x in 0..ambient.len() {
            let d = point_to_set_distance(&ambient, x, &glued.c_mask)?;
            worst_gap = worst_gap.max(d);
        }
        report.push(CertificateEntry::at_most(
            "pipeline.ambient_near_subset",
            "every ambient point within eps of C",
            worst_gap,
            eps,
            S::zero(),
        ));

        let k_in_c = glued.k_positions_in_c();
        let mut dev = S::zero();
        for (pi, &ci) in k_in_c.iter().enumerate() {
            for (pj, &cj) in k_in_c.iter().enumerate() {
                dev = dev.max((glued.space.dist(ci, cj) - dk.space.dist(pi, pj)).abs());
            }
        }
        report.push(CertificateEntry::exact_zero(
            "pipeline.dc_restricts_to_dk",
            "d_C restricted to K^2 equals d_K bit-exactly",
            dev,
        ));

        let mut dev = S::zero();
        for (pa, &x) in glued.c_mask.members().iter().enumerate() {
            for (pb, &y) in glued.c_mask.members().iter().enumerate() {
                dev = dev.max((extension.extended.dist(x, y) - glued.space.dist(pa, pb)).abs());
            }
        }
        report.push(CertificateEntry::exact_zero(
            "pipeline.tilde_restricts_to_dc",
            "extended metric restricted to C^2 equals d_C bit-exactly",
            dev,
        ));

        report.push(CertificateEntry::at_most(
            "pipeline.operator_norm_upper",
            "sampled extension operator norm <= 1",
            operator_norm,
            S::one(),
            S::tol_metric(),
        ));
        if glued.c_mask.len() >= 2 {
            report.push(CertificateEntry::at_least(
                "pipeline.operator_norm_lower",
                "sampled extension operator norm >= 1 (restriction is isometric)",
                operator_norm,
                S::one(),
                S::zero(),
            ));
        } else {
            report.push(CertificateEntry::vacuous(
                "pipeline.operator_norm_lower",
                "sampled extension operator norm >= 1",
                "subset has a single point",
            ));
        }

        let rho_final = rho_distance(&extension.extended, &ambient)?.value();
        report.push(CertificateEntry::at_most(
            "pipeline.rho_budget",
            "rho(extended, d) <= 13 eps",
            rho_final,
            S::of(13.0) * eps,
            S::tol_metric(),
        ));

        Ok(PipelineArtifacts {
            ambient,
            k_mask,
            reference,
            dk,
            glued,
            system: sys,
            extension,
            operator_norm,
            rho_final,
        })
    })();

    match result {
        Ok(artifacts) => {
            if let Some(dir) = &out_dir {
                save_json(&report, dir.join("report.json"))?;
                save_json(&artifacts.ambient, dir.join("ambient.json"))?;
                save_json(&artifacts.dk, dir.join("partition_metric.json"))?;
                save_json(&artifacts.glued, dir.join("glued.json"))?;
                save_json(&artifacts.extension, dir.join("extension.json"))?;
            }
            Ok((artifacts, report))
        }
        Err(e) => {
            if let Some(dir) = &out_dir {
                // Best effort: keep whatever certificates were measured.
                let _ = save_json(&report, dir.join("report_partial.json"));
            }
            Err(e)
        }
    }
}

/// Run the pipeline and return just the consolidated report.
pub fn run_pipeline<S: Scalar>(config: &PipelineConfig<S>) -> Result<CertificateReport<S>> {
    run_pipeline_full(config).map(|(_, report)| report)
}

fn resolve_out_dir<S: Scalar>(config: &PipelineConfig<S>) -> Option<PathBuf> {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => Some(PathBuf::from(dir)),
        _ => config.out_dir.clone(),
    }
}

/// Sampled check that extended values stay near every covering anchor:
/// `|F(f)(x) - f(a_i)| <= 11/3 eps` for unit-ball `f`, outside points `x`,
/// and every ball `i` containing `x`.
fn anchored_extension_bound<S: Scalar>(
    sys: &DugundjiSystem<S>,
    d_a: &FiniteMetricSpace<S>,
    samples: usize,
    seed: u64,
) -> Result<CertificateEntry<S>> {
    let bound = S::of(11.0 / 3.0) * sys.eps;
    if sys.is_degenerate() {
        return Ok(CertificateEntry::vacuous(
            "extension.anchored_bound",
            "|F(f)(x) - f(a_i)| <= 11/3 eps on covered points",
            "subset equals the whole space",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = S::zero();
    for _ in 0..samples {
        let f = sample_lipschitz_vertex(d_a, &mut rng);
        let extended = extend_function(sys, &f)?;
        for (row, &x) in sys.centers.iter().enumerate() {
            let w = sys.weight_row(row);
            for (i, &wi) in w.iter().enumerate() {
                if wi > S::zero() {
                    let anchor_pos = sys
                        .subset
                        .position_of(sys.anchors[i])
                        .expect("anchor in subset");
                    let dev = (extended.value(x) - f.value(anchor_pos)).abs();
                    worst = worst.max(dev);
                }
            }
        }
    }
    Ok(CertificateEntry::at_most(
        "extension.anchored_bound",
        "|F(f)(x) - f(a_i)| <= 11/3 eps on covered points",
        worst,
        bound,
        S::tol_metric(),
    ))
}

/// One probe run: the realized closeness of the extended metric for a fresh
/// random ambient at the given eps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeRow<S> {
    pub trial: usize,
    pub eps: S,
    pub rho: Option<S>,
    pub ratio: Option<S>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeSummary<S> {
    pub rows: Vec<ProbeRow<S>>,
    pub all_pass: bool,
}

pub const DEFAULT_EPS_GRID: [f64; 4] = [0.01, 0.03, 0.05, 0.07];

/// Sweep `trials` random ambient spaces across an eps grid; every realized
/// `rho / eps` ratio must stay at most 13. Stage errors are recorded per row
/// and do not abort the sweep.
pub fn density_probe<S: Scalar>(
    config: &PipelineConfig<S>,
    trials: usize,
    eps_grid: &[S],
) -> Result<ProbeSummary<S>> {
    if trials == 0 {
        return Err(Error::ConfigInvalid("trials must be at least 1".to_string()));
    }
    if eps_grid.is_empty() {
        return Err(Error::ConfigInvalid("eps grid must be non-empty".to_string()));
    }
    let thirteen = S::of(13.0);
    let mut rows = Vec::with_capacity(trials * eps_grid.len());
    for trial in 0..trials {
        for (ei, &eps) in eps_grid.iter().enumerate() {
            let mut cfg = config.clone();
            cfg.eps = eps;
            cfg.out_dir = None;
            cfg.rng_seed = config
                .rng_seed
                .wrapping_add(1_000_003u64.wrapping_mul((trial * eps_grid.len() + ei + 1) as u64));
            match run_pipeline_full(&cfg) {
                Ok((artifacts, report)) => {
                    let ratio = artifacts.rho_final / eps;
                    let pass = report.verdict && ratio <= thirteen + S::tol_metric();
                    rows.push(ProbeRow {
                        trial,
                        eps,
                        rho: Some(artifacts.rho_final),
                        ratio: Some(ratio),
                        pass,
                        error: None,
                    });
                }
                Err(e) => rows.push(ProbeRow {
                    trial,
                    eps,
                    rho: None,
                    ratio: None,
                    pass: false,
                    error: Some(e.to_string()),
                }),
            }
        }
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(ProbeSummary { rows, all_pass })
}

/// Compute a free norm with its dual witness and gap; the `norm` CLI verb and
/// tests share this.
pub fn norm_with_witness<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    mu: &SignedMeasure<S>,
) -> Result<(S, crate::free::TransportPlan<S>, S)> {
    let (norm, plan) = free_space_norm(space, mu)?;
    let witness = dual_witness(space, mu, &plan)?;
    let gap = (norm - witness.pairing).abs();
    Ok((norm, plan, gap))
}

/// Re-carve convenience used by CLI `run` summaries.
pub fn carve_preview<S: Scalar>(
    ambient: &FiniteMetricSpace<S>,
    k: &SubsetMask,
    eps: S,
) -> Result<(usize, usize)> {
    let c = carve_c(ambient, k, eps)?;
    Ok((c.len(), ambient.len() - c.len()))
}
