//! The synthetic delta sweep and the per-run metrics record.
//!
//! Each sweep point embeds its graph once; ELLI and every KSC trial share
//! that embedding. One `M` is sampled per sweep, so only `delta` varies
//! between points.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{bottom_k_eigs_with, Embedding};
use crate::elli::{group_columns, ElliOptions};
use crate::error::{Error, Result};
use crate::graph::{normalized_laplacian, partition_profile, Partition, WeightedGraph};
use crate::ksc::{ksc_from_embedding, KscOptions, Summary};
use crate::metrics::{accuracy, nmi, timed};
use crate::scalar::Scalar;
use crate::synth::{conductance_bound, SynthBase};

/// One JSON line of run output.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Record {
    pub algo: String,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ac: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmi: Option<f64>,
    pub mcc: f64,
    pub sum_conductance: f64,
    pub lambda_next: f64,
    pub elapsed_s: f64,
}

impl Record {
    /// Fills the conductance fields from `partition` on `g`, and `ac`/`nmi`
    /// when a ground truth is given.
    pub fn evaluate<T: Scalar>(
        algo: &str,
        g: &WeightedGraph<T>,
        partition: &Partition,
        truth: Option<&Partition>,
        lambda_next: T,
        elapsed_s: f64,
    ) -> Result<Self> {
        let prof = partition_profile(g, partition)?;
        let (ac, nm) = match truth {
            Some(t) => (Some(accuracy(partition, t)?), Some(nmi(partition, t)?)),
            None => (None, None),
        };
        Ok(Self {
            algo: algo.to_string(),
            k: partition.k(),
            delta: None,
            seed: None,
            trial: None,
            ac,
            nmi: nm,
            mcc: prof.mcc.as_f64(),
            sum_conductance: prof.sum.as_f64(),
            lambda_next: lambda_next.as_f64(),
            elapsed_s,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig<T> {
    pub sizes: Vec<usize>,
    pub deltas: Vec<f64>,
    pub seed: u64,
    pub permute: bool,
    pub run_elli: bool,
    pub run_ksc: bool,
    pub elli: ElliOptions<T>,
    /// `seed` here is ignored; trials are seeded from the sweep seed.
    pub ksc: KscOptions<T>,
}

impl<T: Scalar> SweepConfig<T> {
    pub fn new(sizes: Vec<usize>, deltas: Vec<f64>, seed: u64, trials: usize) -> Self {
        Self {
            sizes,
            deltas,
            seed,
            permute: false,
            run_elli: true,
            run_ksc: true,
            elli: ElliOptions::default(),
            ksc: KscOptions { trials, seed, ..KscOptions::default() },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub delta: f64,
    pub bound: f64,
    /// Conductance profile of the ground truth.
    pub truth_mcc: f64,
    pub elli: Option<Record>,
    pub ksc: Vec<Record>,
}

impl SweepPoint {
    pub fn ksc_mcc(&self) -> Option<Summary> {
        Summary::of(&self.ksc.iter().map(|r| r.mcc).collect::<Vec<_>>())
    }

    pub fn ksc_ac(&self) -> Option<Summary> {
        Summary::of(&self.ksc.iter().filter_map(|r| r.ac).collect::<Vec<_>>())
    }

    /// Every record of this point, ELLI first, then KSC in trial order.
    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.elli.iter().chain(self.ksc.iter())
    }
}

fn sweep_point<T: Scalar>(
    base: &SynthBase<T>,
    cfg: &SweepConfig<T>,
    delta: f64,
) -> Result<SweepPoint> {
    let inst = base.instance(T::lit(delta))?;
    let k = inst.truth.k();
    let truth_prof = partition_profile(&inst.graph, &inst.truth)?;
    let (emb, embed_s): (Result<Embedding<T>>, f64) = timed(|| {
        let lap = normalized_laplacian(&inst.graph)?;
        bottom_k_eigs_with(&lap, k, &cfg.elli.eigen)
    });
    let emb = emb?;

    let elli = if cfg.run_elli {
        let (res, s) = timed(|| group_columns(&emb.p, k, &cfg.elli));
        let res = res?;
        let mut rec = Record::evaluate(
            "elli",
            &inst.graph,
            &res.partition,
            Some(&inst.truth),
            emb.lambda_next,
            embed_s + s,
        )?;
        rec.delta = Some(delta);
        Some(rec)
    } else {
        None
    };

    let ksc = if cfg.run_ksc {
        let opts = KscOptions { seed: cfg.seed, ..cfg.ksc.clone() };
        let (runs, s) = timed(|| ksc_from_embedding(&emb, inst.graph.degrees(), &opts));
        let runs = runs?;
        let per_trial = s / runs.len() as f64;
        runs.iter()
            .map(|run| {
                let mut rec = Record::evaluate(
                    "ksc",
                    &inst.graph,
                    &run.partition,
                    Some(&inst.truth),
                    emb.lambda_next,
                    embed_s + per_trial,
                )?;
                rec.delta = Some(delta);
                rec.seed = Some(run.seed);
                rec.trial = Some(run.trial);
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    Ok(SweepPoint {
        delta,
        bound: conductance_bound(inst.c_min, inst.delta).as_f64(),
        truth_mcc: truth_prof.mcc.as_f64(),
        elli,
        ksc,
    })
}

/// Runs every sweep point (concurrently); results are in `cfg.deltas` order.
pub fn run_sweep<T: Scalar>(cfg: &SweepConfig<T>) -> Result<Vec<SweepPoint>> {
    if cfg.deltas.is_empty() {
        return Err(Error::InvalidParameter("empty delta grid".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let base = SynthBase::<T>::sample(&cfg.sizes, cfg.permute, &mut rng)?;
    cfg.deltas.par_iter().map(|&d| sweep_point(&base, cfg, d)).collect()
}

#[derive(Serialize)]
struct CsvRow {
    delta: f64,
    bound: f64,
    elli_mcc: Option<f64>,
    ksc_mcc_mean: Option<f64>,
    ksc_mcc_min: Option<f64>,
    ksc_mcc_max: Option<f64>,
    elli_ac: Option<f64>,
    ksc_ac_mean: Option<f64>,
}

/// One CSV row per sweep point; columns for an algorithm that did not run
/// are left empty.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        let mcc = p.ksc_mcc();
        w.serialize(CsvRow {
            delta: p.delta,
            bound: p.bound,
            elli_mcc: p.elli.as_ref().map(|r| r.mcc),
            ksc_mcc_mean: mcc.map(|s| s.mean),
            ksc_mcc_min: mcc.map(|s| s.min),
            ksc_mcc_max: mcc.map(|s| s.max),
            elli_ac: p.elli.as_ref().and_then(|r| r.ac),
            ksc_ac_mean: p.ksc_ac().map(|s| s.mean),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_runs() {
        let cfg = SweepConfig::<f64>::new(vec![20, 20, 20], vec![0.0, 0.3], 5, 3);
        let pts = run_sweep(&cfg).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].delta, 0.0);
        let e = pts[0].elli.as_ref().unwrap();
        assert_eq!(e.ac, Some(1.0));
        assert_eq!(e.mcc, 0.0);
        assert_eq!(pts[1].ksc.len(), 3);
        assert!((pts[1].bound - pts[1].truth_mcc).abs() < 1e-12);

        let mut buf = Vec::new();
        write_sweep_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "delta,bound,elli_mcc,ksc_mcc_mean,ksc_mcc_min,ksc_mcc_max,elli_ac,ksc_ac_mean\n"
        ));
        assert_eq!(text.lines().count(), 3);
    }
}
