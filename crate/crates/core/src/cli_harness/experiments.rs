//! The named experiments. Each maps replica indices to per-replica records
//! on the current rayon pool, then builds tables and checks in replica
//! order.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::{derive_stream, Check, ExperimentConfig, Outcome, Stream, Table, TailSampler};
use crate::crt_limit::{
    block_frequencies, evolve_marks, init_marks, mixed_pair_prob, mixed_survival, partition_from_marks,
    sample_block_sizes, sample_reduced_tree, sample_reflected_bm, MarkSet,
};
use crate::dynamic_forest::{naive_component_sizes, Backend, DynamicForest};
use crate::error::Result;
use crate::frag_coag_chain::{observation_index, MarkChainState, RootedForestState};
use crate::random_trees::{sample_uniform_tree, ReducedTree};
use crate::stats::{
    chi_square_critical_001, chi_square_statistic, chi_square_two_sample, half_normal_cdf, ks_two_sample,
    ks_vs_cdf, pool_sparse_cells, pool_tail_cells, wasserstein1, EmpiricalSample,
};
use crate::urn_model::urn_turnover;
use crate::MassPartition;

use super::Experiment;

/// Second and third independent streams of a replica live at these offsets.
const LANE: u64 = 1 << 48;

/// Vertex pairs followed per replica in `paircorr`.
pub(crate) const PAIRS_PER_REPLICA: usize = 4;

/// Edge toggles and comparison checkpoints per `oracle-fuzz` replica.
pub(crate) const FUZZ_TOGGLES: usize = 100_000;
pub(crate) const FUZZ_CHECKPOINTS: usize = 100;

/// Mark-kernel part of `oracle-fuzz`: leaves of the fixed tree, total draws
/// and the chunk size they are split into.
pub(crate) const KERNEL_LEAVES: usize = 8;
pub(crate) const KERNEL_DRAWS: usize = 100_000;
const KERNEL_CHUNK: usize = 1000;
const KERNEL_DELTA: (f64, f64) = (0.3, 0.4);
/// Cap on per-edge survivor and newborn counts in the joint histogram.
const KERNEL_CAP: usize = 8;

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::UrnCheck => urn_check(cfg),
        Experiment::Onedim => onedim(cfg),
        Experiment::Subaging => subaging(cfg),
        Experiment::Paircorr => paircorr(cfg),
        Experiment::Tail => tail(cfg),
        Experiment::OracleFuzz => oracle_fuzz(cfg),
        Experiment::SprExplore => spr_explore(cfg),
    }
}

fn replicas<T, F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..cfg.replicas as u64).into_par_iter().map(f).collect()
}

fn stream(cfg: &ExperimentConfig, lane: u64, replica: u64) -> Stream {
    derive_stream(cfg.master_seed, lane * LANE + replica)
}

fn sample(values: Vec<f64>) -> Result<EmpiricalSample> {
    EmpiricalSample::new(values)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn agg(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn fmt_s(s: f64) -> String {
    // Stable key for grids: shortest round-trip form.
    format!("{s}")
}

fn urn_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.n;
    let horizon = *cfg.s_grid.last().expect("validated nonempty");
    let horizon = horizon.max(0.0);
    let k0 = observation_index(n, cfg.t, 0.0)?;
    let rows = replicas(cfg, |j| {
        let mut rng = stream(cfg, 0, j);
        let turnover = urn_turnover(n, cfg.t, horizon, &mut rng)?;
        let mut rng = stream(cfg, 1, j);
        let tree = sample_uniform_tree(n, &mut rng)?;
        // Only the mark count is read, so connectivity is never queried.
        let mut chain = MarkChainState::with_backend(tree, Backend::Naive);
        chain.run_until(k0, &mut rng)?;
        Ok((turnover, chain.mark_count()))
    })?;
    let scale = (n as f64).sqrt();
    let mut main = Table::new(&["replica", "count", "turnover"]);
    let mut chain_table = Table::new(&["replica", "mark_count"]);
    for (j, (tv, marks)) in rows.iter().enumerate() {
        main.push(vec![j.into(), tv.count.into(), tv.fraction.into()]);
        chain_table.push(vec![j.into(), (*marks).into()]);
    }
    let counts: Vec<f64> = rows.iter().map(|(tv, _)| tv.count as f64 / scale).collect();
    let marks: Vec<f64> = rows.iter().map(|&(_, m)| m as f64 / scale).collect();
    let kept: Vec<f64> = rows.iter().filter(|(tv, _)| !tv.b_empty).map(|(tv, _)| tv.fraction).collect();
    let hn = |x: f64| half_normal_cdf(x, cfg.t).expect("t validated");
    let ks_urn = ks_vs_cdf(&sample(counts.clone())?, hn);
    let ks_chain = ks_vs_cdf(&sample(marks.clone())?, hn);
    let oracle = mixed_survival(cfg.t, horizon)?;
    let mean_turnover = if kept.is_empty() { f64::NAN } else { mean(&kept) };
    let mut checks = vec![
        Check::at_most("urn count ks vs half-normal", ks_urn, 0.03),
        Check::at_most("chain mark count ks vs half-normal", ks_chain, 0.03),
    ];
    if horizon > 0.0 {
        checks.push(Check::at_most("mean turnover vs quadrature", (mean_turnover - oracle).abs(), 0.03));
    }
    Ok(Outcome {
        tables: vec![("", main), ("chain", chain_table)],
        aggregates: agg(&[
            ("urn_count_mean_scaled", mean(&counts)),
            ("chain_mark_count_mean_scaled", mean(&marks)),
            ("half_normal_mean", (2.0 * cfg.t / std::f64::consts::PI).sqrt()),
            ("ks_urn", ks_urn),
            ("ks_chain", ks_chain),
            ("turnover_horizon", horizon),
            ("mean_turnover", mean_turnover),
            ("turnover_oracle", oracle),
            ("b_empty_replicas", (rows.len() - kept.len()) as f64),
        ]),
        checks,
    })
}

struct ChainRecord {
    s: f64,
    k: u64,
    mark_count: usize,
    masses: MassPartition,
}

/// One chain replica observed at every `s` in `grid`.
fn chain_path(cfg: &ExperimentConfig, grid: &[f64], rng: &mut Stream) -> Result<Vec<ChainRecord>> {
    let tree = sample_uniform_tree(cfg.n, rng)?;
    let mut chain = MarkChainState::new(tree);
    let mut out = Vec::with_capacity(grid.len());
    for &s in grid {
        let k = observation_index(cfg.n, cfg.t, s)?;
        chain.run_until(k, rng)?;
        let obs = chain.observe(&[])?;
        out.push(ChainRecord { s, k, mark_count: obs.mark_count, masses: obs.masses });
    }
    Ok(out)
}

fn chain_table(records: &[Vec<ChainRecord>]) -> Table {
    let mut table = Table::new(&["replica", "s", "k", "mark_count", "x1", "x2", "x3"]);
    for (j, path) in records.iter().enumerate() {
        for rec in path {
            table.push(vec![
                j.into(),
                rec.s.into(),
                rec.k.into(),
                rec.mark_count.into(),
                rec.masses.get(1).into(),
                rec.masses.get(2).into(),
                rec.masses.get(3).into(),
            ]);
        }
    }
    table
}

/// Largest three limit frequencies for one draw of `R_t` and a reduced tree.
fn limit_draw(cfg: &ExperimentConfig, rng: &mut Stream) -> Result<(f64, MassPartition)> {
    let r = sample_reflected_bm(cfg.t, rng)?;
    let tree = sample_reduced_tree(cfg.leaves, rng)?;
    let marks = init_marks(&tree, r, rng)?;
    let p = partition_from_marks(&tree, &marks)?;
    Ok((r, block_frequencies(&p, cfg.leaves)?))
}

fn onedim(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rows = replicas(cfg, |j| {
        let path = chain_path(cfg, &[0.0], &mut stream(cfg, 0, j))?;
        let limit = limit_draw(cfg, &mut stream(cfg, 1, j))?;
        Ok((path, limit))
    })?;
    let (paths, limits): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let mut limit_table = Table::new(&["replica", "r", "x1", "x2", "x3"]);
    for (j, (r, m)) in limits.iter().enumerate() {
        limit_table.push(vec![j.into(), (*r).into(), m.get(1).into(), m.get(2).into(), m.get(3).into()]);
    }
    let discrete: Vec<f64> = paths.iter().map(|p| p[0].masses.largest()).collect();
    let continuum: Vec<f64> = limits.iter().map(|(_, m)| m.largest()).collect();
    let (a, b) = (sample(discrete.clone())?, sample(continuum.clone())?);
    let w1 = wasserstein1(&a, &b);
    let ks = ks_two_sample(&a, &b);
    Ok(Outcome {
        tables: vec![("", chain_table(&paths)), ("limit", limit_table)],
        aggregates: agg(&[
            ("discrete_x1_mean", mean(&discrete)),
            ("limit_x1_mean", mean(&continuum)),
            ("wasserstein1", w1),
            ("ks", ks),
        ]),
        checks: vec![
            Check::at_most("x1 wasserstein-1 discrete vs limit", w1, 0.05),
            Check::at_most("x1 ks discrete vs limit", ks, 0.07),
        ],
    })
}

fn subaging(cfg: &ExperimentConfig) -> Result<Outcome> {
    let paths = replicas(cfg, |j| chain_path(cfg, &cfg.s_grid, &mut stream(cfg, 0, j)))?;
    let scale = (cfg.n as f64).sqrt();
    let mut aggregates = BTreeMap::new();
    let mut x1s = Vec::new();
    let mut marks = Vec::new();
    for (idx, &s) in cfg.s_grid.iter().enumerate() {
        let x1: Vec<f64> = paths.iter().map(|p| p[idx].masses.largest()).collect();
        let m: Vec<f64> = paths.iter().map(|p| p[idx].mark_count as f64 / scale).collect();
        aggregates.insert(format!("x1_mean[s={}]", fmt_s(s)), mean(&x1));
        aggregates.insert(format!("mark_count_mean_scaled[s={}]", fmt_s(s)), mean(&m));
        x1s.push(sample(x1)?);
        marks.push(sample(m)?);
    }
    let mut checks = Vec::new();
    for a in 0..cfg.s_grid.len() {
        for b in a + 1..cfg.s_grid.len() {
            let tag = format!("s={} vs s={}", fmt_s(cfg.s_grid[a]), fmt_s(cfg.s_grid[b]));
            checks.push(Check::at_most(&format!("x1 ks {tag}"), ks_two_sample(&x1s[a], &x1s[b]), 0.05));
            checks.push(Check::at_most(
                &format!("mark count ks {tag}"),
                ks_two_sample(&marks[a], &marks[b]),
                0.05,
            ));
        }
    }
    Ok(Outcome { tables: vec![("", chain_table(&paths))], aggregates, checks })
}

fn distinct_pair(n: usize, rng: &mut Stream) -> (usize, usize) {
    let u = rng.random_range(1..=n);
    let mut v = rng.random_range(1..n);
    if v >= u {
        v += 1;
    }
    (u, v)
}

fn paircorr(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.n;
    let records = replicas(cfg, |j| {
        let mut rng = stream(cfg, 0, j);
        let pairs: Vec<(usize, usize)> = (0..PAIRS_PER_REPLICA).map(|_| distinct_pair(n, &mut rng)).collect();
        let tree = sample_uniform_tree(n, &mut rng)?;
        let mut chain = MarkChainState::new(tree);
        chain.run_until(observation_index(n, cfg.t, 0.0)?, &mut rng)?;
        let first = chain.observe(&pairs)?.pair_flags;
        let mut later = Vec::with_capacity(cfg.delta_grid.len());
        for &d in &cfg.delta_grid {
            chain.run_until(observation_index(n, cfg.t, d)?, &mut rng)?;
            later.push(chain.observe(&pairs)?.pair_flags);
        }
        Ok((first, later))
    })?;
    let mut table = Table::new(&["replica", "delta", "pair_id", "at_s", "at_s_plus_delta"]);
    let mut joint = vec![0usize; cfg.delta_grid.len()];
    for (j, (first, later)) in records.iter().enumerate() {
        for (di, &d) in cfg.delta_grid.iter().enumerate() {
            for p in 0..PAIRS_PER_REPLICA {
                let (a, b) = (first[p], later[di][p]);
                table.push(vec![j.into(), d.into(), p.into(), a.into(), b.into()]);
                joint[di] += (a && b) as usize;
            }
        }
    }
    let total = (records.len() * PAIRS_PER_REPLICA) as f64;
    let mut aggregates = BTreeMap::new();
    let mut checks = Vec::new();
    let mut freqs = Vec::new();
    for (di, &d) in cfg.delta_grid.iter().enumerate() {
        let freq = joint[di] as f64 / total;
        let oracle = mixed_pair_prob(cfg.t, d)?;
        aggregates.insert(format!("joint_freq[delta={}]", fmt_s(d)), freq);
        aggregates.insert(format!("mixed_pair_prob[delta={}]", fmt_s(d)), oracle);
        checks.push(Check::at_most(
            &format!("joint pair frequency vs quadrature, delta={}", fmt_s(d)),
            (freq - oracle).abs(),
            0.02,
        ));
        freqs.push(freq);
    }
    if freqs.len() >= 2 {
        let gap = freqs[0] - freqs[freqs.len() - 1];
        aggregates.insert("decorrelation_gap".into(), gap);
        checks.push(Check::exceeds("decorrelation gap first vs last delta", gap, 0.01));
    }
    Ok(Outcome { tables: vec![("", table)], aggregates, checks })
}

fn tail(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (lo, hi) = cfg.window;
    let i = cfg.leaves;
    let records = replicas(cfg, |j| {
        let mut rng = stream(cfg, 0, j);
        let sizes = match cfg.sampler {
            TailSampler::Tree => {
                let tree = sample_reduced_tree(i, &mut rng)?;
                let marks = init_marks(&tree, cfg.r, &mut rng)?;
                partition_from_marks(&tree, &marks)?.block_sizes()
            }
            TailSampler::LineBreaking => sample_block_sizes(i, cfg.r, &mut rng)?,
        };
        let masses = MassPartition::from_counts(&sizes, i)?;
        let r_hat = crate::crt_limit::estimate_r(masses.as_slice(), lo..=hi).ok();
        Ok((masses, r_hat))
    })?;
    let mut table = Table::new(&["replica", "i", "mass_i", "i2_mass", "R_hat"]);
    let mut i2_sum = 0.0;
    for (j, (masses, r_hat)) in records.iter().enumerate() {
        for rank in lo..=hi {
            let m = masses.get(rank);
            let i2 = (rank * rank) as f64 * m;
            i2_sum += i2;
            table.push(vec![j.into(), rank.into(), m.into(), i2.into(), (*r_hat).into()]);
        }
    }
    let i2_mean = i2_sum / (records.len() * (hi - lo + 1)) as f64;
    let estimates: Vec<f64> = records.iter().filter_map(|(_, r)| *r).collect();
    let r_mean = if estimates.is_empty() { f64::NAN } else { mean(&estimates) };
    let blocks: Vec<f64> = records.iter().map(|(m, _)| m.len() as f64).collect();
    let target = 2.0 / (std::f64::consts::PI * cfg.r * cfg.r);
    let band = (0.45 / (cfg.r * cfg.r), 0.85 / (cfg.r * cfg.r));
    Ok(Outcome {
        tables: vec![("", table)],
        aggregates: agg(&[
            ("i2_mass_mean", i2_mean),
            ("i2_mass_target", target),
            ("r_hat_mean", r_mean),
            ("r_hat_defined_replicas", estimates.len() as f64),
            ("mean_block_count", mean(&blocks)),
        ]),
        checks: vec![
            Check::within("mean i^2 Y(i) over window", i2_mean, band.0, band.1),
            Check::at_most("estimated R relative error", (r_mean - cfg.r).abs() / cfg.r, 0.15),
        ],
    })
}

struct FuzzRecord {
    checkpoints: usize,
    mismatches: usize,
}

fn forest_fuzz(n: usize, rng: &mut Stream) -> Result<FuzzRecord> {
    let tree = sample_uniform_tree(n, rng)?;
    let m = tree.edge_count();
    let mut forest = DynamicForest::with_backend(tree.clone(), Backend::EulerTour);
    let every = (FUZZ_TOGGLES / FUZZ_CHECKPOINTS).max(1);
    let mut rec = FuzzRecord { checkpoints: 0, mismatches: 0 };
    if m == 0 {
        return Ok(rec);
    }
    for step in 1..=FUZZ_TOGGLES {
        let e = rng.random_range(0..m);
        if forest.is_present(e) {
            forest.cut(e)?;
        } else {
            forest.link(e)?;
        }
        if step % every == 0 {
            let absent: Vec<usize> = (0..m).filter(|&e| !forest.is_present(e)).collect();
            rec.checkpoints += 1;
            if forest.component_sizes() != naive_component_sizes(&tree, &absent)? {
                rec.mismatches += 1;
            }
        }
    }
    Ok(rec)
}

/// Per-draw mark-kernel tallies on the fixed tree.
#[derive(Default)]
struct KernelTally {
    /// `after[e][c]`: draws with `c` atoms on edge `e` after one step of
    /// length `d1 + d2` from a stationary start.
    after: Vec<Vec<usize>>,
    /// Joint (survivor, newborn) histograms per edge, one step vs two.
    joint_one: Vec<Vec<usize>>,
    joint_two: Vec<Vec<usize>>,
    atoms: usize,
    survivors: usize,
}

impl KernelTally {
    fn new(edges: usize) -> Self {
        let cells = (KERNEL_CAP + 1) * (KERNEL_CAP + 1);
        Self {
            after: vec![Vec::new(); edges],
            joint_one: vec![vec![0; cells]; edges],
            joint_two: vec![vec![0; cells]; edges],
            ..Default::default()
        }
    }

    fn merge(mut self, other: KernelTally) -> Self {
        for (a, b) in self.after.iter_mut().zip(other.after) {
            if a.len() < b.len() {
                a.resize(b.len(), 0);
            }
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.joint_one.iter_mut().zip(other.joint_one) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.joint_two.iter_mut().zip(other.joint_two) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.atoms += other.atoms;
        self.survivors += other.survivors;
        self
    }
}

fn joint_cells(tree: &ReducedTree, start: &MarkSet, later: &MarkSet, into: &mut [Vec<usize>]) {
    let mut survivors = vec![0usize; tree.edge_count()];
    let mut newborn = vec![0usize; tree.edge_count()];
    for atom in later.atoms() {
        if atom.id < start.next_id() {
            survivors[atom.edge] += 1;
        } else {
            newborn[atom.edge] += 1;
        }
    }
    for e in 0..tree.edge_count() {
        let cell = survivors[e].min(KERNEL_CAP) * (KERNEL_CAP + 1) + newborn[e].min(KERNEL_CAP);
        into[e][cell] += 1;
    }
}

fn kernel_chunk(tree: &ReducedTree, r: f64, draws: usize, rng: &mut Stream) -> Result<KernelTally> {
    let (d1, d2) = KERNEL_DELTA;
    let half_life = 2.0 * r * std::f64::consts::LN_2;
    let mut tally = KernelTally::new(tree.edge_count());
    for _ in 0..draws {
        let start = init_marks(tree, r, rng)?;
        let one = evolve_marks(tree, &start, r, d1 + d2, rng)?;
        let mid = evolve_marks(tree, &start, r, d1, rng)?;
        let two = evolve_marks(tree, &mid, r, d2, rng)?;
        for (e, &c) in one.counts_per_edge().iter().enumerate() {
            let row = &mut tally.after[e];
            if row.len() <= c {
                row.resize(c + 1, 0);
            }
            row[c] += 1;
        }
        joint_cells(tree, &start, &one, &mut tally.joint_one);
        joint_cells(tree, &start, &two, &mut tally.joint_two);
        let halved = evolve_marks(tree, &start, r, half_life, rng)?;
        tally.atoms += start.len();
        tally.survivors += halved.atoms().iter().filter(|a| a.id < start.next_id()).count();
    }
    Ok(tally)
}

fn poisson_pmf(mean: f64, upto: usize) -> Vec<f64> {
    let mut p = vec![(-mean).exp()];
    for k in 1..=upto {
        let prev = p[k - 1];
        p.push(prev * mean / k as f64);
    }
    p
}

/// Summed chi-square of per-edge counts against Poisson(`r` length).
fn stationarity_chi_square(tree: &ReducedTree, r: f64, after: &[Vec<usize>], draws: usize) -> Result<(f64, usize, Table)> {
    let mut table = Table::new(&["edge", "length", "mean_count", "expected_mean", "chi2", "df"]);
    let (mut stat, mut df) = (0.0, 0usize);
    for (e, row) in after.iter().enumerate() {
        let len = tree.lengths()[e];
        let lambda = r * len;
        let top = row.len().max(1) - 1;
        let pmf = poisson_pmf(lambda, top);
        let mut expected: Vec<f64> = pmf.iter().map(|p| p * draws as f64).collect();
        // Last cell takes the whole upper tail.
        let head: f64 = pmf[..top].iter().sum();
        expected[top] = (1.0 - head).max(0.0) * draws as f64;
        let observed: Vec<f64> = row.iter().map(|&c| c as f64).collect();
        let observed = if observed.is_empty() { vec![0.0] } else { observed };
        let (o, x) = pool_tail_cells(&observed, &expected, 5.0);
        let mean_count = row.iter().enumerate().map(|(c, &k)| (c * k) as f64).sum::<f64>() / draws as f64;
        let (edge_stat, edge_df) = if o.len() >= 2 { (chi_square_statistic(&o, &x)?, o.len() - 1) } else { (0.0, 0) };
        stat += edge_stat;
        df += edge_df;
        table.push(vec![e.into(), len.into(), mean_count.into(), lambda.into(), edge_stat.into(), edge_df.into()]);
    }
    Ok((stat, df, table))
}

fn semigroup_chi_square(one: &[Vec<usize>], two: &[Vec<usize>]) -> Result<(f64, usize)> {
    let (mut stat, mut df) = (0.0, 0usize);
    for (a, b) in one.iter().zip(two) {
        let (pa, pb) = pool_sparse_cells(a, b, 20);
        if pa.len() >= 2 {
            let (s, d) = chi_square_two_sample(&pa, &pb)?;
            stat += s;
            df += d;
        }
    }
    Ok((stat, df))
}

fn oracle_fuzz(cfg: &ExperimentConfig) -> Result<Outcome> {
    let fuzz = replicas(cfg, |j| forest_fuzz(cfg.n, &mut stream(cfg, 0, j)))?;
    let mut table = Table::new(&["replica", "toggles", "checkpoints", "mismatches"]);
    for (j, rec) in fuzz.iter().enumerate() {
        table.push(vec![j.into(), FUZZ_TOGGLES.into(), rec.checkpoints.into(), rec.mismatches.into()]);
    }
    let mismatches: usize = fuzz.iter().map(|r| r.mismatches).sum();

    let tree = sample_reduced_tree(KERNEL_LEAVES, &mut stream(cfg, 2, 0))?;
    let chunks = KERNEL_DRAWS / KERNEL_CHUNK;
    let tally = (0..chunks as u64)
        .into_par_iter()
        .map(|c| kernel_chunk(&tree, cfg.r, KERNEL_CHUNK, &mut stream(cfg, 3, c)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(KernelTally::new(tree.edge_count()), KernelTally::merge);
    let draws = chunks * KERNEL_CHUNK;
    let (stat_a, df_a, kernel_table) = stationarity_chi_square(&tree, cfg.r, &tally.after, draws)?;
    let (stat_b, df_b) = semigroup_chi_square(&tally.joint_one, &tally.joint_two)?;
    let survival = tally.survivors as f64 / tally.atoms as f64;
    let crit_a = chi_square_critical_001(df_a.max(1));
    let crit_b = chi_square_critical_001(df_b.max(1));
    Ok(Outcome {
        tables: vec![("", table), ("kernel", kernel_table)],
        aggregates: agg(&[
            ("forest_mismatches", mismatches as f64),
            ("stationarity_chi2", stat_a),
            ("stationarity_df", df_a as f64),
            ("stationarity_critical_001", crit_a),
            ("semigroup_chi2", stat_b),
            ("semigroup_df", df_b as f64),
            ("semigroup_critical_001", crit_b),
            ("half_life_survival", survival),
            ("half_life_atoms", tally.atoms as f64),
        ]),
        checks: vec![
            Check::at_most("dynamic forest mismatches vs naive oracle", mismatches as f64, 0.0),
            Check::at_most("mark counts after evolve are Poisson (chi2)", stat_a, crit_a),
            Check::at_most("evolve semigroup, two steps vs one (chi2)", stat_b, crit_b),
            Check::at_most("per-atom survival at half-life vs 0.5", (survival - 0.5).abs(), 0.01),
        ],
    })
}

fn spr_explore(cfg: &ExperimentConfig) -> Result<Outcome> {
    let steps = cfg.observation_steps()?;
    let paths = replicas(cfg, |j| {
        let mut rng = stream(cfg, 0, j);
        let tree = sample_uniform_tree(cfg.n, &mut rng)?;
        let root = rng.random_range(1..=cfg.n);
        let mut forest = RootedForestState::from_tree(&tree, root)?;
        let mut out = Vec::with_capacity(steps.len());
        for &k in &steps {
            while forest.step_count() < k {
                forest.step(&mut rng);
            }
            out.push((forest.tree_count(), forest.ranked_masses()));
        }
        Ok(out)
    })?;
    let mut table = Table::new(&["replica", "s", "k", "tree_count", "x1", "x2", "x3"]);
    let mut aggregates = BTreeMap::new();
    for (j, path) in paths.iter().enumerate() {
        for ((&s, &k), (count, m)) in cfg.s_grid.iter().zip(&steps).zip(path) {
            table.push(vec![
                j.into(),
                s.into(),
                k.into(),
                (*count).into(),
                m.get(1).into(),
                m.get(2).into(),
                m.get(3).into(),
            ]);
        }
    }
    for (idx, &s) in cfg.s_grid.iter().enumerate() {
        let x1: Vec<f64> = paths.iter().map(|p| p[idx].1.largest()).collect();
        let trees: Vec<f64> = paths.iter().map(|p| p[idx].0 as f64).collect();
        aggregates.insert(format!("x1_mean[s={}]", fmt_s(s)), mean(&x1));
        aggregates.insert(format!("tree_count_mean[s={}]", fmt_s(s)), mean(&trees));
    }
    Ok(Outcome { tables: vec![("", table)], aggregates, checks: Vec::new() })
}
