use smic::generate::{gen_circle_gaussian, uniform_priors};
use smic::metrics::{contingency, Labeling};
use smic::{cluster_once, standardize};

fn main() {
    let data = standardize(&gen_circle_gaussian(200, &uniform_priors(2), 0).unwrap()).unwrap();
    let truth = Labeling::from_assignments(data.labels().unwrap().to_vec()).unwrap();
    println!("true class sizes: {:?}", truth.cluster_sizes());
    for t in [4usize, 6, 9] {
        let (model, labels) = cluster_once(&data, 2, t, &uniform_priors(2)).unwrap();
        let table = contingency(&labels, &truth).unwrap();
        println!(
            "t={t}: eig={:?} sizes={:?} confusion={:?}",
            model.eigenvalues(),
            labels.cluster_sizes(),
            table.counts()
        );
        for (k, v) in model.eigenvectors().iter().enumerate() {
            let m1: f64 = v
                .iter()
                .zip(truth.assignments())
                .filter(|&(_, &y)| y == 1)
                .map(|(x, _)| x * x)
                .sum();
            let pos: f64 = v.iter().map(|&x| x.max(0.0)).sum();
            let neg: f64 = v.iter().map(|&x| (-x).max(0.0)).sum();
            println!(
                "  phi{}: class1 mass {:.4}, pos sum {:.4}, neg sum {:.4}",
                k + 1,
                m1,
                pos,
                neg
            );
        }
    }
}
