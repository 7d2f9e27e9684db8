use std::time::Instant;
use occo_core::dataset::{generate_dataset, CompletionSample, GenParams};
use occo_core::net::{init_params, ModelDims};
use occo_core::probe::{embed_cloud, linear_probe, ProbeConfig};
use occo_core::seed::derive_seed;
use occo_core::synth::{benchmark_objects, PoseMode};
use occo_core::train::{pretrain, TrainConfig};

fn dims_with_embed(embed: usize) -> ModelDims {
    ModelDims {
        point_mlp_widths: vec![32, 64],
        embed_dim: embed,
        coarse_mlp_widths: vec![64],
        n_coarse: 32,
        grid_side: 4,
        grid_span: 0.05,
        fold_mlp_widths: vec![32, 32],
    }
}

fn probe_clouds(samples: &[CompletionSample], objs: &[occo_core::dataset::SourceObject]) -> Vec<(u32, occo_core::PointCloud)> {
    let mut seen = std::collections::BTreeMap::new();
    for s in samples {
        seen.entry(s.object_id).or_insert_with(|| s.occluded.clone());
    }
    seen.into_iter().map(|(id, c)| (objs[id as usize].label().unwrap(), c)).collect()
}

fn embed_objects(layers: &[occo_core::net::Dense], samples: &[(u32, occo_core::PointCloud)]) -> (Vec<Vec<f64>>, Vec<u32>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (label, cloud) in samples {
        xs.push(embed_cloud(layers, cloud).unwrap());
        ys.push(*label);
    }
    (xs, ys)
}

#[test]
fn proto_transfer_variants() {
    for (name, embed, views, steps, batch) in [
        ("free-v8-s500-e64", 64usize, 8usize, 500u64, 16usize),
        ("free-v8-s1000-e64", 64, 8, 1000, 16),
        ("free-v8-s500-e32", 32, 8, 500, 16),
    ] {
        let t0 = Instant::now();
        let dims = dims_with_embed(embed);
        let train_objs = benchmark_objects(60, 2000, PoseMode::Free);
        let test_objs = benchmark_objects(30, 3000, PoseMode::Free);
        let (train_ds, _) = generate_dataset(&train_objs, &GenParams::new(views, 128, dims.n_coarse, dims.fine_size(), 2000)).unwrap();
        let (test_ds, _) = generate_dataset(&test_objs, &GenParams::new(1, 128, dims.n_coarse, dims.fine_size(), 3000)).unwrap();
        let train_clouds = probe_clouds(&train_ds, &train_objs);
        let test_clouds = probe_clouds(&test_ds, &test_objs);
        let mut occo_accs = Vec::new();
        let mut rand_accs = Vec::new();
        for seed in 0..5u64 {
            let config = TrainConfig {
                epochs: 100_000, batch_size: batch, lr0: 1e-3, lr_every: 100_000,
                seed: 100 + seed, max_steps: Some(steps), ..TrainConfig::default()
            };
            let out = pretrain(&train_ds, &dims, &config).unwrap();
            let random = init_params(&dims, derive_seed(900 + seed, "rand-init", &[])).unwrap();
            let pc = ProbeConfig::default();
            let (trx, try_) = embed_objects(&out.params.encoder, &train_clouds);
            let (tex, tey) = embed_objects(&out.params.encoder, &test_clouds);
            let acc_o = linear_probe((&trx, &try_), (&tex, &tey), &pc).unwrap();
            let (rrx, rry) = embed_objects(&random.encoder, &train_clouds);
            let (rex, rey) = embed_objects(&random.encoder, &test_clouds);
            let acc_r = linear_probe((&rrx, &rry), (&rex, &rey), &pc).unwrap();
            occo_accs.push(acc_o);
            rand_accs.push(acc_r);
            println!("  {name} seed {seed}: occo {acc_o:.3} rand {acc_r:.3}");
        }
        let mo = occo_accs.iter().sum::<f64>() / 5.0;
        let mr = rand_accs.iter().sum::<f64>() / 5.0;
        println!("VARIANT {name}: occo {mo:.3} rand {mr:.3} gap {:.3} in {:?}", mo - mr, t0.elapsed());
    }
}
