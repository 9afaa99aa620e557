use smic::generate::{gen_circle_gaussian, uniform_priors};
use smic::kernel::{build_neighbors, sparse_local_scaling_kernel};
use smic::{standardize, top_eigenpairs};

fn components(k: &smic::SparseKernelMatrix) -> Vec<usize> {
    let n = k.n();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = next;
        while let Some(i) = stack.pop() {
            for &(j, _) in k.row(i) {
                if comp[j] == usize::MAX {
                    comp[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    comp
}

fn main() {
    let data = standardize(&gen_circle_gaussian(200, &uniform_priors(2), 0).unwrap()).unwrap();
    let truth = data.labels().unwrap().to_vec();
    for t in 1..=10usize {
        let nbrs = build_neighbors(&data, t).unwrap();
        let kernel = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
        let comp = components(&kernel);
        let ncomp = comp.iter().max().unwrap() + 1;
        let sys = top_eigenpairs(&kernel, 4).unwrap();
        // mass of each eigenvector on true class 1 vs class 2
        let masses: Vec<(f64, f64)> = sys
            .eigenvectors()
            .iter()
            .map(|v| {
                let m1: f64 = v
                    .iter()
                    .zip(&truth)
                    .filter(|&(_, &y)| y == 1)
                    .map(|(x, _)| x * x)
                    .sum();
                let m2: f64 = v
                    .iter()
                    .zip(&truth)
                    .filter(|&(_, &y)| y == 2)
                    .map(|(x, _)| x * x)
                    .sum();
                (m1, m2)
            })
            .collect();
        println!(
            "t={t:2} components={ncomp:3} eig={:?}",
            sys.eigenvalues()
                .iter()
                .map(|v| (v * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        );
        for (i, (m1, m2)) in masses.iter().enumerate() {
            println!("   phi{}: class1 mass {m1:.3}, class2 mass {m2:.3}", i + 1);
        }
    }
}
