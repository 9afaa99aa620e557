use smic::generate::{gen_circle_gaussian, gen_double_spirals, gen_four_blobs, gen_high_low, uniform_priors};
use smic::kernel::{build_neighbors, sparse_local_scaling_kernel};
use smic::lsmi::{lsmi, CvGrid, LabeledSample};
use smic::metrics::{adjusted_rand_index, Labeling};
use smic::{standardize, top_eigenpairs, Dataset, SparseKernelMatrix};

// degree-normalized kernel D^{-1/2} K D^{-1/2}
fn normalize(k: &SparseKernelMatrix) -> SparseKernelMatrix {
    let n = k.n();
    let mut deg = vec![0.0; n];
    for i in 0..n {
        deg[i] = k.row(i).iter().map(|&(_, v)| v).sum::<f64>();
    }
    let mut entries = Vec::new();
    for i in 0..n {
        for &(j, v) in k.row(i) {
            if j >= i {
                entries.push((i, j, v / (deg[i] * deg[j]).sqrt()));
            }
        }
    }
    SparseKernelMatrix::from_triplets(n, &entries).unwrap()
}

fn cluster_variant(data: &Dataset, c: usize, t: usize, normalized: bool) -> Labeling {
    let nbrs = build_neighbors(data, t).unwrap();
    let k = sparse_local_scaling_kernel(&nbrs, data).unwrap();
    let k = if normalized { normalize(&k) } else { k };
    let sys = top_eigenpairs(&k, c).unwrap();
    let vectors = smic::fix_signs(sys.eigenvectors());
    let n = data.n();
    let sums: Vec<f64> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x.max(0.0)).sum())
        .collect();
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = 0;
        let mut best_score = 0.0;
        for y in 0..c {
            if sums[y] == 0.0 {
                continue;
            }
            let s = vectors[y][i].max(0.0) / sums[y];
            if s > best_score {
                best_score = s;
                best = y;
            }
        }
        labels.push(best + 1);
    }
    Labeling::new(labels, c).unwrap()
}

fn pipeline(data: &Dataset, c: usize, normalized: bool, seed: u64) -> (usize, f64) {
    let grid = CvGrid::default();
    let mut best_t = 0;
    let mut best_score = f64::NEG_INFINITY;
    let mut best_labels = None;
    for t in 1..=10usize {
        let labels = cluster_variant(data, c, t, normalized);
        // drop empty clusters for the scorer
        let sizes = labels.cluster_sizes();
        let nonempty = sizes.iter().filter(|&&s| s > 0).count();
        let compact: Labeling = if nonempty < c {
            let mut remap = vec![0; c + 1];
            let mut next = 0;
            for (y, &s) in sizes.iter().enumerate() {
                if s > 0 {
                    next += 1;
                    remap[y + 1] = next;
                }
            }
            Labeling::new(
                labels.assignments().iter().map(|&y| remap[y]).collect(),
                next,
            )
            .unwrap()
        } else {
            labels.clone()
        };
        let samples = LabeledSample::pair_rows(data.points(), &compact);
        match lsmi(&samples, &grid, seed) {
            Ok(est) => {
                if est.value > best_score {
                    best_score = est.value;
                    best_t = t;
                    best_labels = Some(labels);
                }
            }
            Err(_) => continue,
        }
    }
    let truth = Labeling::from_assignments(data.labels().unwrap().to_vec()).unwrap();
    let ari = adjusted_rand_index(&best_labels.unwrap(), &truth).unwrap();
    (best_t, ari)
}

fn main() {
    for normalized in [false, true] {
        println!("=== normalized = {normalized} ===");
        for name in ["blobs", "circle", "spirals", "highlow"] {
            let mut aris = Vec::new();
            for seed in 0..10u64 {
                let (data, c) = match name {
                    "blobs" => (gen_four_blobs(200, &uniform_priors(4), seed).unwrap(), 4),
                    "circle" => (gen_circle_gaussian(200, &uniform_priors(2), seed).unwrap(), 2),
                    "spirals" => (gen_double_spirals(200, &uniform_priors(2), seed).unwrap(), 2),
                    _ => (gen_high_low(200, &uniform_priors(2), seed).unwrap(), 2),
                };
                let data = standardize(&data).unwrap();
                let (t, ari) = pipeline(&data, c, normalized, seed);
                aris.push((seed, t, ari));
            }
            let ones = aris.iter().filter(|&&(_, _, a)| a == 1.0).count();
            let mut sorted: Vec<f64> = aris.iter().map(|&(_, _, a)| a).collect();
            sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let median = (sorted[4] + sorted[5]) / 2.0;
            println!(
                "{name:8} perfect {ones}/10 median {median:.3} | {:?}",
                aris.iter()
                    .map(|&(_, t, a)| format!("t{t}:{a:.2}"))
                    .collect::<Vec<_>>()
            );
        }
    }
}
