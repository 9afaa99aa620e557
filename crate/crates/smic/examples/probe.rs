use smic::generate::{gen_circle_gaussian, gen_double_spirals, gen_four_blobs, gen_high_low, uniform_priors};
use smic::lsmi::CvGrid;
use smic::metrics::{adjusted_rand_index, Labeling};
use smic::{smic_with_model_selection, standardize, Dataset};

fn run(name: &str, gen: impl Fn(u64) -> Dataset, c: usize) {
    let ts: Vec<usize> = (1..=10).collect();
    let mut aris = Vec::new();
    let start = std::time::Instant::now();
    for seed in 0..10u64 {
        let data = standardize(&gen(seed)).unwrap();
        let out = smic_with_model_selection(&data, c, &ts, None, &CvGrid::default(), seed).unwrap();
        let truth = Labeling::from_assignments(data.labels().unwrap().to_vec()).unwrap();
        let ari = adjusted_rand_index(&out.report.labeling, &truth).unwrap();
        aris.push((seed, out.report.selected_t, ari));
    }
    let ones = aris.iter().filter(|&&(_, _, a)| a == 1.0).count();
    let mut sorted: Vec<f64> = aris.iter().map(|&(_, _, a)| a).collect();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let median = (sorted[4] + sorted[5]) / 2.0;
    println!(
        "{name}: perfect {ones}/10, median {median:.3}, wall {:?}",
        start.elapsed()
    );
    for (seed, t, ari) in &aris {
        println!("  seed {seed}: t={t} ARI={ari:.3}");
    }
}

fn main() {
    run("blobs", |s| gen_four_blobs(200, &uniform_priors(4), s).unwrap(), 4);
    run("circle", |s| gen_circle_gaussian(200, &uniform_priors(2), s).unwrap(), 2);
    run("spirals", |s| gen_double_spirals(200, &uniform_priors(2), s).unwrap(), 2);
    run("highlow", |s| gen_high_low(200, &uniform_priors(2), s).unwrap(), 2);
}
