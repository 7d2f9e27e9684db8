use occo_core::net::init_params;
use occo_core::probe::{embed_cloud, linear_probe, robustness_probe, ProbeConfig};
use occo_core::seed::derive_seed;

use crate::config::ProbeSection;
use crate::{CliError, CliResult, ProbeArgs};

pub fn run(args: ProbeArgs, section: &ProbeSection) -> CliResult {
    let encoder = super::load_any_encoder(&args.ckpt)?;
    let samples = super::load_samples(&args.data)?;
    let objects = super::object_clouds(&samples);
    let labels_all = super::read_label_file(&args.labels)?;
    let labels: Vec<u32> = objects
        .iter()
        .map(|(id, _)| {
            labels_all
                .get(*id as usize)
                .copied()
                .ok_or_else(|| CliError::input(format!("no label for object id {id}")))
        })
        .collect::<Result<_, _>>()?;
    let clouds: Vec<_> = objects.into_iter().map(|(_, c)| c).collect();
    let seed = args.seed.or(section.seed).unwrap_or(0);
    let n_seeds = section.ami_seeds.unwrap_or(10);
    let mut distinct = labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if let Some(k) = args.k.or(section.k) {
        if k != distinct.len() {
            eprintln!(
                "note: --k {k} differs from the {} distinct labels; clustering uses the label count",
                distinct.len()
            );
        }
    }

    let random_init = init_params(&encoder.dims, derive_seed(seed, "probe-random-init", &[]))
        .map_err(CliError::from_core)?;

    // Deterministic 70/30 object split for the linear probe.
    let mut order: Vec<usize> = (0..clouds.len()).collect();
    order.sort_by_key(|&i| derive_seed(seed, "probe-split", &[i as u64]));
    let n_train = (clouds.len() * 7) / 10;
    let probe_config = ProbeConfig {
        iterations: section.probe_iterations.unwrap_or(500),
        lr: section.probe_lr.unwrap_or(0.1),
        l2: section.probe_l2.unwrap_or(1e-4),
    };

    println!("init,transform_row,ami_mean,ami_stderr,probe_acc");
    for (init_name, layers) in [("pretrained", &encoder.layers), ("random", &random_init.encoder)] {
        let embeddings: Vec<Vec<f64>> = clouds
            .iter()
            .map(|c| embed_cloud(layers, c).map_err(CliError::from_core))
            .collect::<Result<_, _>>()?;
        let (mut train_x, mut train_y, mut test_x, mut test_y) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (pos, &i) in order.iter().enumerate() {
            if pos < n_train {
                train_x.push(embeddings[i].clone());
                train_y.push(labels[i]);
            } else {
                test_x.push(embeddings[i].clone());
                test_y.push(labels[i]);
            }
        }
        let acc = linear_probe((&train_x, &train_y), (&test_x, &test_y), &probe_config)
            .map_err(CliError::from_core)?;
        let rows = robustness_probe(layers, &clouds, &labels, n_seeds, seed)
            .map_err(CliError::from_core)?;
        for row in rows {
            println!(
                "{init_name},{},{},{},{acc}",
                if row.transforms.is_empty() { "none" } else { &row.transforms },
                row.ami_mean,
                row.ami_stderr
            );
        }
    }
    Ok(())
}
