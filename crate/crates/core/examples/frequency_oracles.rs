//! Estimate item counts from randomized reports with GRR and OLH, and compare
//! the empirical error with the analytical standard deviation.
//!
//!     cargo run --release --example frequency_oracles

use ldp_fpminer::encoding::EncodedValue;
use ldp_fpminer::oracle::{
    grr_aggregate, grr_perturb, olh_aggregate, olh_perturb, ps_sample, GrrParams, OlhParams, Padded,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn main() -> ldp_fpminer::Result<()> {
    let (n, d, epsilon) = (50_000usize, 16u64, 1.0);
    let mut rng = ChaCha12Rng::seed_from_u64(5);

    // skewed true values: item i has weight 1/(i+1)
    let weights: Vec<f64> = (0..d).map(|i| 1.0 / (i + 1) as f64).collect();
    let total: f64 = weights.iter().sum();
    let values: Vec<u64> = (0..n)
        .map(|_| {
            let mut u = rng.random::<f64>() * total;
            weights.iter().position(|w| { u -= w; u < 0.0 }).unwrap_or(d as usize - 1) as u64
        })
        .collect();
    let mut truth = vec![0usize; d as usize];
    values.iter().for_each(|&v| truth[v as usize] += 1);

    let grr = GrrParams::new(epsilon, d)?;
    let reports = values
        .iter()
        .map(|&v| grr_perturb(v, &grr, &mut rng))
        .collect::<ldp_fpminer::Result<Vec<_>>>()?;
    let grr_est = grr_aggregate(&reports, &grr)?;

    let olh = OlhParams::new(epsilon)?;
    let domain: Vec<EncodedValue> = (0..d as u32).map(EncodedValue::item).collect();
    let reports: Vec<_> = values
        .iter()
        .map(|&v| olh_perturb(&domain[v as usize], &olh, rng.random(), &mut rng))
        .collect();
    let olh_est = olh_aggregate(&reports, &domain, &olh)?;

    println!("n={n} d={d} epsilon={epsilon} (OLH g={})", olh.g);
    println!("sd  GRR {:.0}  OLH {:.0}", grr.variance(n).sqrt(), olh.variance(n).sqrt());
    println!("{:>4} {:>8} {:>10} {:>10}", "item", "true", "GRR", "OLH");
    for i in 0..d as usize {
        println!("{i:>4} {:>8} {:>10.0} {:>10.0}", truth[i], grr_est[i], olh_est[i]);
    }

    // padding and sampling: a set-valued user reports one element or a dummy
    let basket = [3u32, 7, 9];
    let mut picks = [0usize; 4];
    for _ in 0..10_000 {
        match ps_sample(&basket, 5, &mut rng)?.value {
            Padded::Value(x) => picks[basket.iter().position(|&b| b == x).unwrap()] += 1,
            Padded::Dummy => picks[3] += 1,
        }
    }
    println!("PS_5 of {basket:?} over 10000 draws: {picks:?} (last is the dummy)");
    Ok(())
}
