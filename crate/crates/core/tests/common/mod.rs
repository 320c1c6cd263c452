//! Reference implementations used only by tests. Each one is written from
//! the problem definition and shares no code with the library routine it
//! checks.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use hpi_core::alignment::BLOSUM62;
use rand::Rng;

const ORDER: &[u8; 20] = b"ARNDCQEGHILKMFPSTWYV";

fn sub(a: u8, b: u8) -> i64 {
    let i = ORDER.iter().position(|&c| c == a).unwrap();
    let j = ORDER.iter().position(|&c| c == b).unwrap();
    BLOSUM62[i][j] as i64
}

/// Best global alignment score by walking every alignment path, with no
/// memoisation. Exponential; meant for sequences of length <= 6.
pub fn brute_align(a: &[u8], b: &[u8], gap: i64) -> i64 {
    fn walk(a: &[u8], b: &[u8], gap: i64) -> i64 {
        match (a.split_first(), b.split_first()) {
            (None, None) => 0,
            (Some(_), None) => -gap * a.len() as i64,
            (None, Some(_)) => -gap * b.len() as i64,
            (Some((&x, ra)), Some((&y, rb))) => {
                let pair = sub(x, y) + walk(ra, rb, gap);
                let del = -gap + walk(ra, b, gap);
                let ins = -gap + walk(a, rb, gap);
                pair.max(del).max(ins)
            }
        }
    }
    walk(a, b, gap)
}

pub fn random_protein(rng: &mut impl Rng, min_len: usize, max_len: usize) -> String {
    let len = rng.gen_range(min_len..=max_len);
    (0..len).map(|_| ORDER[rng.gen_range(0..20)] as char).collect()
}

/// The negative-sampling rule read literally: `(h, v)` is admissible when it
/// is not a known positive and, for every positive partner `v'` of `h`,
/// `D(v, v') >= t`.
pub fn brute_denovo(
    hosts: &[String],
    viruses: &[String],
    positives: &BTreeSet<(String, String)>,
    d: &BTreeMap<(String, String), f64>,
    t: f64,
) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for h in hosts {
        for v in viruses {
            if positives.contains(&(h.clone(), v.clone())) {
                continue;
            }
            let mut ok = true;
            for (ph, pv) in positives {
                if ph == h && d[&(v.clone(), pv.clone())] < t {
                    ok = false;
                }
            }
            if ok {
                out.insert((h.clone(), v.clone()));
            }
        }
    }
    out
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counting
/// one half.
pub fn pairwise_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if positive[i] && !positive[j] {
                den += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / den
}

/// Box-constrained SVM dual with a linear equality constraint:
/// minimise `1/2 a'Qa - sum(a)` over `y'a = 0`, `0 <= a <= ub`.
pub struct Qp {
    pub q: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub ub: Vec<f64>,
}

pub fn rbf_gram(x: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| {
            x.iter()
                .map(|b| {
                    let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                    (-gamma * d2).exp()
                })
                .collect()
        })
        .collect()
}

impl Qp {
    pub fn svm(x: &[Vec<f64>], y: &[f64], ub: &[f64], gamma: f64) -> Self {
        let k = rbf_gram(x, gamma);
        let n = y.len();
        let q = (0..n)
            .map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect())
            .collect();
        Qp {
            q,
            y: y.to_vec(),
            ub: ub.to_vec(),
        }
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    pub fn objective(&self, a: &[f64]) -> f64 {
        let n = self.n();
        let mut v = 0.0;
        for i in 0..n {
            for j in 0..n {
                v += 0.5 * a[i] * self.q[i][j] * a[j];
            }
            v -= a[i];
        }
        v
    }

    fn grad(&self, a: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.q[i][j] * a[j]).sum::<f64>() - 1.0)
            .collect()
    }

    /// Euclidean projection onto the feasible set, by bisection on the
    /// multiplier of the equality constraint.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let at = |lam: f64| -> Vec<f64> {
            z.iter()
                .zip(&self.y)
                .zip(&self.ub)
                .map(|((&zi, &yi), &ui)| (zi - lam * yi).clamp(0.0, ui))
                .collect()
        };
        let balance = |a: &[f64]| a.iter().zip(&self.y).map(|(ai, yi)| ai * yi).sum::<f64>();
        let span = z.iter().map(|v| v.abs()).fold(0.0, f64::max) + self.ub.iter().fold(0.0, |m: f64, &u| m.max(u));
        let (mut lo, mut hi) = (-span - 1.0, span + 1.0);
        // balance(at(lam)) is non-increasing in lam
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if balance(&at(mid)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    }

    /// Accelerated projected gradient with restarts, followed by an exact
    /// solve of the KKT system on the identified free set.
    pub fn solve(&self, iters: usize) -> Vec<f64> {
        let n = self.n();
        let lip = (0..n)
            .map(|i| self.q[i].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            .max(1e-12);
        let mut a = self.project(&vec![0.0; n]);
        let mut z = a.clone();
        let mut t = 1.0f64;
        let mut f_prev = self.objective(&a);
        for _ in 0..iters {
            let g = self.grad(&z);
            let step: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - gi / lip).collect();
            let next = self.project(&step);
            let f_next = self.objective(&next);
            if f_next > f_prev {
                // restart momentum
                t = 1.0;
                z = a.clone();
                continue;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            z = next
                .iter()
                .zip(&a)
                .map(|(x, xp)| x + (t - 1.0) / t_next * (x - xp))
                .collect();
            a = next;
            t = t_next;
            f_prev = f_next;
        }
        match self.polish(&a) {
            Some(p) if self.objective(&p) <= self.objective(&a) + 1e-15 => p,
            _ => a,
        }
    }

    /// Solve the stationarity conditions with the bound pattern of `a`
    /// fixed. Returns `None` when the result leaves the box.
    fn polish(&self, a: &[f64]) -> Option<Vec<f64>> {
        let n = self.n();
        let eps = 1e-9;
        let free: Vec<usize> = (0..n).filter(|&i| a[i] > eps && a[i] < self.ub[i] - eps).collect();
        let mut fixed = a.to_vec();
        for i in 0..n {
            if a[i] <= eps {
                fixed[i] = 0.0;
            } else if a[i] >= self.ub[i] - eps {
                fixed[i] = self.ub[i];
            }
        }
        if free.is_empty() {
            let balance: f64 = fixed.iter().zip(&self.y).map(|(a, y)| a * y).sum();
            return (balance.abs() < 1e-12).then_some(fixed);
        }
        // unknowns: a_F and the multiplier nu
        let m = free.len() + 1;
        let mut mat = vec![vec![0.0; m + 1]; m];
        for (r, &i) in free.iter().enumerate() {
            for (c, &j) in free.iter().enumerate() {
                mat[r][c] = self.q[i][j];
            }
            mat[r][m - 1] = self.y[i];
            let bound: f64 = (0..n)
                .filter(|j| !free.contains(j))
                .map(|j| self.q[i][j] * fixed[j])
                .sum();
            mat[r][m] = 1.0 - bound;
        }
        for (c, &j) in free.iter().enumerate() {
            mat[m - 1][c] = self.y[j];
        }
        mat[m - 1][m] = -(0..n)
            .filter(|j| !free.contains(j))
            .map(|j| self.y[j] * fixed[j])
            .sum::<f64>();
        let sol = gauss(mat)?;
        for (c, &i) in free.iter().enumerate() {
            if sol[c] < -1e-12 || sol[c] > self.ub[i] + 1e-12 {
                return None;
            }
            fixed[i] = sol[c].clamp(0.0, self.ub[i]);
        }
        Some(fixed)
    }

    /// Decision value at training point `i`: `sum_j a_j y_j K_ji + b`.
    pub fn decision_at(&self, a: &[f64], b: f64, i: usize) -> f64 {
        // y_j K_ji = Q_ji y_i
        (0..self.n()).map(|j| a[j] * self.q[j][i] * self.y[i]).sum::<f64>() + b
    }

    /// Bias from the KKT conditions at `a`: the average of `y_i - g_i` over
    /// free vectors, otherwise the midpoint of the interval allowed by the
    /// bound vectors. `g_i = sum_j a_j y_j K_ij`.
    pub fn bias(&self, a: &[f64]) -> f64 {
        let n = self.n();
        let eps = 1e-9;
        let g: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[j] * self.q[i][j] * self.y[i]).sum())
            .collect();
        let free: Vec<usize> = (0..n).filter(|&i| a[i] > eps && a[i] < self.ub[i] - eps).collect();
        if !free.is_empty() {
            return free.iter().map(|&i| self.y[i] - g[i]).sum::<f64>() / free.len() as f64;
        }
        // a_i = 0 needs y_i (g_i + b) >= 1; a_i = ub needs y_i (g_i + b) <= 1
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let edge = self.y[i] - g[i];
            let at_zero = a[i] <= eps;
            if (at_zero && self.y[i] > 0.0) || (!at_zero && self.y[i] < 0.0) {
                lo = lo.max(edge);
            } else {
                hi = hi.min(edge);
            }
        }
        0.5 * (lo + hi)
    }
}

fn gauss(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// A random SVM problem of size `n` with both classes present, either in 686
/// dimensions with entries in `[0, 1]` or in 2 dimensions.
pub fn random_svm_problem(rng: &mut impl Rng, n: usize, high_dim: bool) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>, f64) {
    let dim = if high_dim { 686 } else { 2 };
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
    let mut y: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    y[0] = 1.0;
    y[n - 1] = -1.0;
    let ub: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0f64).max(1e-3)).collect();
    // keep kernel values away from both 0 and 1
    let gamma = if high_dim {
        rng.gen_range(0.002..0.03)
    } else {
        rng.gen_range(0.2..3.0)
    };
    (x, y, ub, gamma)
}

/// A random sampling instance: up to 8 hosts and 8 viruses, random
/// positives and a random symmetric dissimilarity matrix.
pub struct SamplingInstance {
    pub hosts: Vec<String>,
    pub viruses: Vec<String>,
    pub positives: BTreeSet<(String, String)>,
    pub d: BTreeMap<(String, String), f64>,
    pub table: hpi_core::seqio::InteractionTable,
    pub matrix: hpi_core::alignment::DissimilarityMatrix,
}

pub fn random_sampling_instance(rng: &mut impl Rng) -> SamplingInstance {
    use hpi_core::seqio::{ProteinRecord, Role};
    let hosts: Vec<String> = (0..rng.gen_range(1..=8)).map(|i| format!("h{i}")).collect();
    let viruses: Vec<String> = (0..rng.gen_range(1..=8)).map(|i| format!("v{i}")).collect();
    let density = rng.gen_range(0.0..0.6);
    let mut positives = BTreeSet::new();
    for h in &hosts {
        for v in &viruses {
            if rng.gen_bool(density) {
                positives.insert((h.clone(), v.clone()));
            }
        }
    }
    let n = viruses.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            // a coarse grid makes exact ties with the threshold likely
            let x = (rng.gen_range(0..=20) as f64) / 20.0;
            rows[i][j] = x;
            rows[j][i] = x;
        }
    }
    let mut d = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            d.insert((viruses[i].clone(), viruses[j].clone()), rows[i][j]);
        }
    }
    let rec = |id: &String, role, g| ProteinRecord {
        id: id.clone(),
        role,
        family_group: g,
        sequence: "MK".into(),
    };
    let table = hpi_core::seqio::InteractionTable::new(
        hosts.iter().map(|h| rec(h, Role::Host, None)),
        viruses
            .iter()
            .enumerate()
            .map(|(i, v)| rec(v, Role::Pathogen, Some(i as u32 % 3))),
        positives.iter().cloned(),
    )
    .unwrap();
    let matrix = hpi_core::alignment::DissimilarityMatrix::from_rows(viruses.clone(), rows).unwrap();
    SamplingInstance {
        hosts,
        viruses,
        positives,
        d,
        table,
        matrix,
    }
}

pub fn run_cli(args: &[&str]) -> hpi_core::Result<()> {
    use clap::Parser;
    let argv = std::iter::once("hpi").chain(args.iter().copied());
    hpi_core::cli::run(hpi_core::cli::Cli::try_parse_from(argv).expect("arguments parse"))
}

/// Synthesize a small corpus in `dir` and run every batch subcommand on it.
/// Returns the paths of the artifacts that should be reproducible.
pub fn run_pipeline(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let d = p("");
    run_cli(&[
        "synth",
        "--out-dir",
        &d,
        "--families",
        "4",
        "--per-family",
        "3",
        "--hosts",
        "16",
    ])
    .unwrap();
    run_cli(&[
        "featurize",
        "--hosts",
        &p("hosts.fasta"),
        "--viruses",
        &p("viruses.fasta"),
        "--out-dir",
        &d,
    ])
    .unwrap();
    run_cli(&[
        "build-dataset",
        "--interactions",
        &p("interactions.tsv"),
        "--hosts",
        &p("hosts.fasta"),
        "--viruses",
        &p("viruses.fasta"),
        "--mode",
        "denovo",
        "--threshold",
        "0.7",
        "--count",
        "ratio:2",
        "--seed",
        "5",
        "--out",
        &p("dataset.tsv"),
    ])
    .unwrap();
    let (hf, vf, dataset) = (p("hosts.features.tsv"), p("viruses.features.tsv"), p("dataset.tsv"));
    let features = ["--host-features", hf.as_str(), "--virus-features", vf.as_str()];
    let mut train = vec!["train", "--dataset", &dataset];
    train.extend(features);
    let model = p("model.txt");
    train.extend(["--C", "10", "--gamma", "0.1", "--threshold", "0.7", "--out", &model]);
    run_cli(&train).unwrap();
    let mut cv = vec!["crossval", "--dataset", &dataset];
    cv.extend(features);
    let report = p("cv.tsv");
    cv.extend(["--C", "10", "--gamma", "0.1", "--out", &report]);
    run_cli(&cv).unwrap();
    run_cli(&[
        "predict",
        "--model",
        &model,
        "--pairs",
        &p("dataset.tsv"),
        "--hosts",
        &p("hosts.fasta"),
        "--viruses",
        &p("viruses.fasta"),
        "--out",
        &p("predictions.tsv"),
    ])
    .unwrap();
    [
        "hosts.fasta",
        "viruses.fasta",
        "interactions.tsv",
        "hosts.features.tsv",
        "viruses.features.tsv",
        "dataset.tsv",
        "model.txt",
        "cv.tsv",
        "cv.json",
        "predictions.tsv",
    ]
    .iter()
    .map(|n| dir.join(n))
    .collect()
}
