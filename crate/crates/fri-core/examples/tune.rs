//! Scratch tuning runs (not part of the deliverable).

use fri_core::annihilator::annihilate_reconstruct;
use fri_core::model::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(|s| s.as_str()).unwrap_or("ann");

    if mode == "ann" {
        // Annihilator demo scan: K=5, N=30, centered layouts.
        println!("sigma_h  span  sum_z2   snr(1e-6)  E_clean      medE_noisy  fails/proj");
        for &sigma_h in &[3.5f64, 4.0, 4.5, 5.0, 5.5, 6.0] {
            for &s in &[3.5f64, 4.0, 4.5, 5.0] {
                let base_t: Vec<f64> = vec![
                    14.5 - 2.0 * s - 0.13,
                    14.5 - s + 0.21,
                    14.5 + 0.07,
                    14.5 + s - 0.16,
                    14.5 + 2.0 * s + 0.11,
                ];
                let base_c = [1.0f64, -0.8, 1.2, -0.9, 1.1];
                let acq = AcquisitionConfig::new(sigma_h, 1.0, 30).unwrap();
                // scale weights for snr(1e-6) = 137 dB: sum z^2 = 1503.5
                let sig0 = FriSignal::new(base_c.to_vec(), base_t.clone()).unwrap();
                let z0 = synthesize_samples(&sig0, &acq);
                let e0: f64 = z0.values.iter().map(|v| v * v).sum();
                let scale = (1503.5 / e0).sqrt();
                let c: Vec<f64> = base_c.iter().map(|w| w * scale).collect();
                let sig = FriSignal::new(c, base_t.clone()).unwrap();
                let z = synthesize_samples(&sig, &acq);
                let sum_z2: f64 = z.values.iter().map(|v| v * v).sum();

                let clean = match annihilate_reconstruct(&z, 5, &acq) {
                    Ok(rec) => reconstruction_error(&rec.signal, &sig, sigma_h).unwrap(),
                    Err(e) => {
                        println!(
                            "{sigma_h:5.1} {s:5.1}  clean FAILED: {e}"
                        );
                        continue;
                    }
                };

                let mut es = Vec::new();
                let mut fails = 0;
                let mut projs = 0;
                let mut snrs = Vec::new();
                for seed in 0..25u64 {
                    let y = add_noise(&z, &NoiseSpec::new(1e-6, seed).unwrap());
                    snrs.push(snr_db(&z, &y).unwrap());
                    match annihilate_reconstruct(&y, 5, &acq) {
                        Ok(rec) => {
                            if rec.projected_roots {
                                projs += 1;
                            }
                            es.push(reconstruction_error(&rec.signal, &sig, sigma_h).unwrap());
                        }
                        Err(_) => {
                            fails += 1;
                            es.push(1.0);
                        }
                    }
                }
                let snr_mean = snrs.iter().sum::<f64>() / snrs.len() as f64;
                println!(
                    "{sigma_h:5.1} {s:5.1} {sum_z2:8.1} {snr_mean:8.2}  {clean:10.3e}  {:10.3e}  {fails}/{projs}",
                    median(es)
                );
            }
        }
    }

    if mode == "ann2" {
        // Candidate configs over 100 seeds with quartiles.
        for &(sigma_h, s) in &[(4.0f64, 3.5f64), (4.0, 4.0), (4.5, 4.0), (4.5, 4.5), (5.0, 4.0)] {
            let base_t: Vec<f64> = vec![
                14.5 - 2.0 * s - 0.13,
                14.5 - s + 0.21,
                14.5 + 0.07,
                14.5 + s - 0.16,
                14.5 + 2.0 * s + 0.11,
            ];
            let base_c = [1.0f64, -0.8, 1.2, -0.9, 1.1];
            let acq = AcquisitionConfig::new(sigma_h, 1.0, 30).unwrap();
            let sig0 = FriSignal::new(base_c.to_vec(), base_t.clone()).unwrap();
            let z0 = synthesize_samples(&sig0, &acq);
            let e0: f64 = z0.values.iter().map(|v| v * v).sum();
            let scale = (1503.5 / e0).sqrt();
            let c: Vec<f64> = base_c.iter().map(|w| w * scale).collect();
            let sig = FriSignal::new(c.clone(), base_t.clone()).unwrap();
            let z = synthesize_samples(&sig, &acq);
            let mut es = Vec::new();
            let mut fails = 0;
            for seed in 0..100u64 {
                let y = add_noise(&z, &NoiseSpec::new(1e-6, seed).unwrap());
                match annihilate_reconstruct(&y, 5, &acq) {
                    Ok(rec) => es.push(reconstruction_error(&rec.signal, &sig, sigma_h).unwrap()),
                    Err(_) => {
                        fails += 1;
                        es.push(1.0);
                    }
                }
            }
            es.sort_by(|a, b| a.partial_cmp(b).unwrap());
            println!(
                "sigma_h {sigma_h} span {s}: fails {fails}/100  min {:.3e} q25 {:.3e} med {:.3e} q75 {:.3e}",
                es[0], es[25], es[50], es[75]
            );
            println!("  t = {base_t:?}");
            println!("  c = {c:?}");
        }
    }

    if mode == "crit5" {
        use fri_core::harness::*;
        let signed = args.get(2).map(|s| s == "signed").unwrap_or(false);
        let sep: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(2.0);
        println!("signed={signed} sep={sep}");
        let t0 = std::time::Instant::now();
        let mut spec_a = ExperimentSpec::new("expt_a_cell", 1.0, 1.0);
        spec_a.sigma_e_sweep = vec![2.5];
        spec_a.n_sweep = vec![50];
        spec_a.n_seeds = 25;
        spec_a.methods = vec![Method::Gibbs, Method::GibbsLlse];
        spec_a.gibbs.burn_in = 150;
        spec_a.gibbs.keep = 500;
        spec_a.truth = TruthRule::Random {
            k: 5,
            min_separation: sep,
            weight_low: 14.0,
            weight_high: 21.0,
            signed,
            margin: 3.0,
        };
        let mut spec_b = spec_a.clone();
        spec_b.name = "expt_b_cell".into();
        spec_b.sigma_e_sweep = vec![5.0];
        spec_b.n_sweep = vec![100];
        spec_b.truth = TruthRule::Random {
            k: 10,
            min_separation: sep,
            weight_low: 28.0,
            weight_high: 42.0,
            signed,
            margin: 3.0,
        };
        let ra = run_experiment(&spec_a).unwrap();
        let rb = run_experiment(&spec_b).unwrap();
        println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
        for (name, recs) in [("A", &ra), ("B", &rb)] {
            for m in [Method::Gibbs, Method::GibbsLlse] {
                let mut es: Vec<f64> = recs
                    .iter()
                    .filter(|r| r.method == m)
                    .filter_map(|r| r.error)
                    .collect();
                es.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mean = es.iter().sum::<f64>() / es.len() as f64;
                println!(
                    "{name} {:?}: mean {mean:.4} med {:.4} max {:.4}",
                    m, es[es.len() / 2], es[es.len() - 1]
                );
            }
            let snr = snr_table(recs);
            println!("{name} snr: {:?}", snr.iter().map(|(_, v)| *v).collect::<Vec<_>>());
        }
        // paired llse <= raw comparison
        let mut better = 0;
        let mut total = 0;
        for recs in [&ra, &rb] {
            for r in recs.iter().filter(|r| r.method == Method::GibbsLlse) {
                let twin = recs
                    .iter()
                    .find(|g| {
                        g.method == Method::Gibbs
                            && g.seed_index == r.seed_index
                            && g.sigma_e == r.sigma_e
                            && g.n_samples == r.n_samples
                    })
                    .unwrap();
                total += 1;
                if r.error.unwrap() <= twin.error.unwrap() {
                    better += 1;
                }
            }
        }
        println!("llse <= raw in {better}/{total} paired runs");
    }

    if mode == "ann3" {
        // Rounded frozen demo candidate.
        let t = vec![6.4f64, 10.7, 14.6, 18.3, 22.6];
        let c = vec![13.4f64, -10.7, 16.1, -12.0, 14.7];
        let acq = AcquisitionConfig::new(4.0, 1.0, 30).unwrap();
        let sig = FriSignal::new(c, t).unwrap();
        let z = synthesize_samples(&sig, &acq);
        let sum_z2: f64 = z.values.iter().map(|v| v * v).sum();
        println!("sum z^2 = {sum_z2:.2}; nominal snr(1e-6) = {:.2} dB",
            10.0 * (sum_z2 / (30.0 * 1e-12)).log10());
        let clean = annihilate_reconstruct(&z, 5, &acq).map(
            |rec| reconstruction_error(&rec.signal, &sig, 4.0).unwrap());
        println!("clean E = {clean:?}");
        let mut es = Vec::new();
        let mut fails = 0;
        let mut snrs = Vec::new();
        for seed in 0..100u64 {
            let y = add_noise(&z, &NoiseSpec::new(1e-6, seed).unwrap());
            snrs.push(snr_db(&z, &y).unwrap());
            match annihilate_reconstruct(&y, 5, &acq) {
                Ok(rec) => es.push(reconstruction_error(&rec.signal, &sig, 4.0).unwrap()),
                Err(_) => { fails += 1; es.push(1.0); }
            }
        }
        es.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let snr_mean = snrs.iter().sum::<f64>() / 100.0;
        let snr_min = snrs.iter().cloned().fold(f64::INFINITY, f64::min);
        let snr_max = snrs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("fails {fails}/100  q10 {:.3e} q25 {:.3e} med {:.3e}", es[10], es[25], es[50]);
        println!("snr realized: mean {snr_mean:.2} [{snr_min:.2}, {snr_max:.2}]");
    }

    if mode == "gibbs" {
        use fri_core::gibbs::*;
        use fri_core::llse::llse_refine;
        // Gibbs demo: K=5, N=30, sigma_h=2, t fixed; c scaled for target SNR.
        let t = vec![4.2f64, 9.5, 14.1, 19.8, 25.3];
        let base_c = [10.0f64, -8.0, 12.0, -9.0, 11.0];
        let acq = AcquisitionConfig::new(2.0, 1.0, 30).unwrap();
        let target_snr: f64 = args
            .get(2)
            .map(|s| s.parse().unwrap())
            .unwrap_or(10.2);
        let sig0 = FriSignal::new(base_c.to_vec(), t.clone()).unwrap();
        let z0 = synthesize_samples(&sig0, &acq);
        let e0: f64 = z0.values.iter().map(|v| v * v).sum();
        // snr(2.5) target: sum z^2 = 10^(snr/10) * 30 * 6.25
        let want = 10f64.powf(target_snr / 10.0) * 30.0 * 6.25;
        let scale = (want / e0).sqrt();
        let c: Vec<f64> = base_c.iter().map(|w| w * scale).collect();
        println!("scaled c = {c:?}");
        let sig = FriSignal::new(c, t.clone()).unwrap();
        let z = synthesize_samples(&sig, &acq);
        let sum_z2: f64 = z.values.iter().map(|v| v * v).sum();
        println!("sum z^2 = {sum_z2:.2}; snr(2.5) nominal = {:.2} dB; snr(1e-6) nominal = {:.2} dB",
            10.0 * (sum_z2 / (30.0 * 6.25)).log10(),
            10.0 * (sum_z2 / (30.0 * 1e-12)).log10());

        let mut es_raw = Vec::new();
        let mut es_llse = Vec::new();
        let mut sig_errs = Vec::new();
        let mut conv_sweeps = Vec::new();
        let mut fallbacks = 0usize;
        for seed in 0..25u64 {
            let y = add_noise(&z, &NoiseSpec::new(2.5, 9000 + seed).unwrap());
            let cfg = GibbsConfig::new(5, seed);
            let (trace, mmse) = run_gibbs(&y, &acq, &cfg).unwrap();
            fallbacks += trace.rejection_fallback_count;
            let est = mmse.to_signal().unwrap();
            let e_raw = reconstruction_error(&est, &sig, 2.0).unwrap();
            let w = llse_refine(&y, &mmse.t, &acq).unwrap();
            let est2 = FriSignal::new(w, mmse.t.clone()).unwrap();
            let e_llse = reconstruction_error(&est2, &sig, 2.0).unwrap();
            es_raw.push(e_raw);
            es_llse.push(e_llse);
            sig_errs.push((mmse.sigma_e - 2.5).abs() / 2.5);
            // convergence: first sweep within 1% above the final plateau
            let nll = &trace.neg_log_likelihood;
            let mut tail: Vec<f64> = nll[400..].to_vec();
            tail.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let plateau = tail[tail.len() / 2];
            let thresh = plateau + 0.01 * plateau.abs();
            let cs = nll.iter().position(|&v| v <= thresh).unwrap_or(9999);
            conv_sweeps.push(cs);
        }
        es_raw.sort_by(|a, b| a.partial_cmp(b).unwrap());
        es_llse.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sig_errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!("E raw:   min {:.4} q25 {:.4} med {:.4} q75 {:.4} max {:.4}",
            es_raw[0], es_raw[6], es_raw[12], es_raw[18], es_raw[24]);
        println!("E llse:  min {:.4} q25 {:.4} med {:.4} q75 {:.4} max {:.4}",
            es_llse[0], es_llse[6], es_llse[12], es_llse[18], es_llse[24]);
        println!("sig rel: med {:.4}", sig_errs[12]);
        println!("conv sweeps: {conv_sweeps:?}");
        println!("fallbacks total: {fallbacks}");
        let pairs_better = es_llse.iter().zip(&es_raw).filter(|(l, r)| l <= r).count();
        println!("llse<=raw pairs (sorted, indicative only): {pairs_better}");
    }
}
