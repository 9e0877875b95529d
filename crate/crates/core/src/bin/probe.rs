// Temporary tuning probe; not part of the deliverable.
use ghicast_core::ga::{default_search_space, evolve_gbdt, GaConfig};
use ghicast_core::metrics::mae;
use ghicast_core::models::{fit_gbdt, fit_linear, predict_gbdt, predict_linear, GbdtConfig};
use ghicast_core::preprocess::{
    clean, daytime_filter, make_supervised, split_70_30, zscore_apply, zscore_fit, MODEL_VARS,
};
use ghicast_core::synth::{gen_synthetic_with, SynthOptions};

fn main() {
    let opts = SynthOptions {
        year: 2018,
        start_day: 105,
        day_stride: 5,
        sentinel_rate: 0.02,
        cloud_bias: 0.0,
        ..SynthOptions::default()
    };
    let mut ds_rows = Vec::new();
    for (year, seed) in [(2018, 11u64), (2019, 12u64)] {
        let o = SynthOptions { year, ..opts.clone() };
        let ds = gen_synthetic_with(seed, 10, &o);
        ds_rows.extend(ds.rows().to_vec());
    }
    let meta = ghicast_core::StationMeta {
        name: "probe".into(),
        latitude: 40.05,
        longitude: -88.37,
        elevation_m: 213.0,
    };
    let ds = ghicast_core::StationDataset::new(meta, ds_rows).unwrap();
    let day = daytime_filter(&clean(&ds).unwrap());
    let frame = make_supervised(&day, &MODEL_VARS).unwrap();
    println!("samples: {}", frame.n_rows());

    let (train, test) = split_70_30(&frame, 1).unwrap();
    let params = zscore_fit(&train);
    let train = zscore_apply(&train, &params).unwrap();
    let test = zscore_apply(&test, &params).unwrap();

    let lr = fit_linear(&train).unwrap();
    let lr_mae = mae(test.y(), &predict_linear(&lr, &test).unwrap()).unwrap();
    println!("LR                     test MAE {lr_mae:8.3}");

    let configs = [
        ("default-100(eta.3,d6)", GbdtConfig::default()),
        ("eta.1-100-d6", GbdtConfig { eta: 0.1, ..GbdtConfig::default() }),
        ("eta.1-300-d6", GbdtConfig { eta: 0.1, n_rounds: 300, ..GbdtConfig::default() }),
        ("eta.05-300-d8", GbdtConfig { eta: 0.05, n_rounds: 300, max_depth: 8, ..GbdtConfig::default() }),
        ("eta.3-300-d4", GbdtConfig { eta: 0.3, n_rounds: 300, max_depth: 4, ..GbdtConfig::default() }),
        ("eta.1-300-d3", GbdtConfig { eta: 0.1, n_rounds: 300, max_depth: 3, ..GbdtConfig::default() }),
        ("eta.3-100-d2", GbdtConfig { eta: 0.3, n_rounds: 100, max_depth: 2, ..GbdtConfig::default() }),
        ("mcw20-eta.1-200-d6", GbdtConfig { eta: 0.1, n_rounds: 200, min_child_weight: 20.0, ..GbdtConfig::default() }),
    ];
    for (name, cfg) in configs {
        let m = fit_gbdt(&train, &cfg).unwrap();
        let e = mae(test.y(), &predict_gbdt(&m, &test).unwrap()).unwrap();
        println!("{name:22} test MAE {e:8.3}");
    }

    if std::env::args().any(|a| a == "--bench") {
        let names: Vec<String> = ["dw_solar", "netsolar", "par", "uvb", "totalnet", "diffuse", "rh", "zen"]
            .iter().map(|s| s.to_string()).collect();
        let train8 = train.select_columns(&names).unwrap();
        for (label, cfg) in [
            ("300r-d7-sub.8", GbdtConfig { n_rounds: 300, eta: 0.06, max_depth: 7, subsample: 0.8, colsample: 0.56, ..GbdtConfig::default() }),
            ("160r-d6-full", GbdtConfig { n_rounds: 160, eta: 0.1, max_depth: 6, ..GbdtConfig::default() }),
        ] {
            let t = std::time::Instant::now();
            let m = fit_gbdt(&train8, &cfg).unwrap();
            println!("{label}: {:.2}s ({} trees)", t.elapsed().as_secs_f64(), m.trees.len());
        }
        return;
    }

    if std::env::args().any(|a| a == "--ga") {
        let n = train.n_rows();
        let holdout_len = ((n as f64 * 0.2).round() as usize).clamp(1, n - 1);
        let ga_train = train.subset_rows(&(0..n - holdout_len).collect::<Vec<_>>());
        let ga_holdout = train.subset_rows(&(n - holdout_len..n).collect::<Vec<_>>());
        let t = std::time::Instant::now();
        let (best, hist) = evolve_gbdt(
            &default_search_space(),
            &GaConfig { generations: 10, seed: 5, ..GaConfig::default() },
            &ga_train,
            &ga_holdout,
        )
        .unwrap();
        let cfg = best.decode().unwrap();
        let m = fit_gbdt(&train, &cfg).unwrap();
        let e = mae(test.y(), &predict_gbdt(&m, &test).unwrap()).unwrap();
        println!(
            "GA-10 best {:?} test MAE {e:8.3} ({} gens, {:.1}s)",
            cfg,
            hist.generations.len() - 1,
            t.elapsed().as_secs_f64()
        );
    }
}
