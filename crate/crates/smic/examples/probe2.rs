use smic::generate::{gen_circle_gaussian, gen_double_spirals, uniform_priors};
use smic::lsmi::CvGrid;
use smic::metrics::{adjusted_rand_index, Labeling};
use smic::{cluster_once, smic_with_model_selection, standardize};

fn main() {
    for (name, data) in [
        (
            "circle",
            standardize(&gen_circle_gaussian(200, &uniform_priors(2), 0).unwrap()).unwrap(),
        ),
        (
            "spirals",
            standardize(&gen_double_spirals(200, &uniform_priors(2), 0).unwrap()).unwrap(),
        ),
    ] {
        println!("=== {name} ===");
        let truth = Labeling::from_assignments(data.labels().unwrap().to_vec()).unwrap();
        let ts: Vec<usize> = (1..=10).collect();
        let out = smic_with_model_selection(&data, 2, &ts, None, &CvGrid::default(), 0).unwrap();
        for cand in &out.report.candidates {
            let ari = adjusted_rand_index(&cand.labeling, &truth).unwrap();
            let (model, _) = cluster_once(&data, 2, cand.t, &uniform_priors(2)).unwrap();
            let sizes = cand.labeling.cluster_sizes();
            println!(
                "t={:2} lsmi={:+.4} ari={:+.3} gamma={:7.3} delta={:8.4} sizes={:?} eig={:?}",
                cand.t,
                cand.lsmi,
                ari,
                cand.gamma,
                cand.delta,
                sizes,
                model
                    .eigenvalues()
                    .iter()
                    .map(|v| (v * 100.0).round() / 100.0)
                    .collect::<Vec<_>>(),
            );
        }
        println!("selected t={}", out.report.selected_t);
    }
}
