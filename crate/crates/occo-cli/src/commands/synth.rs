use std::fmt::Write as _;

use occo_core::dataset::SourceObject;
use occo_core::io::write_ply;
use occo_core::synth::{benchmark_objects, sample_labeled, PoseMode, ShapeKind};

use crate::config::SynthSection;
use crate::{CliError, CliResult, SynthArgs};

fn write_off(mesh: &occo_core::TriMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "OFF\n{} {} 0", mesh.vertices.len(), mesh.faces.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {} {}", v.x as f32, v.y as f32, v.z as f32);
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

pub fn run(args: SynthArgs, section: &SynthSection) -> CliResult {
    let count = args.count.or(section.count).unwrap_or(20);
    let seed = args.seed.or(section.seed).unwrap_or(0);
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", args.out.display())))?;
    let objects = benchmark_objects(count, seed, PoseMode::Free);
    let mut labels = String::new();
    for obj in &objects {
        if let SourceObject::Mesh { name, mesh, label } = obj {
            let path = args.out.join(format!("{name}.off"));
            std::fs::write(&path, write_off(mesh))
                .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
            let _ = writeln!(labels, "{}", label.unwrap_or(0));
        }
    }
    std::fs::write(args.out.join("labels.txt"), labels)
        .map_err(|e| CliError::input(format!("cannot write labels.txt: {e}")))?;

    if let Some(n_points) = args.parts_points.or(section.parts_points) {
        let parts_dir = args.out.join("parts");
        std::fs::create_dir_all(&parts_dir)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", parts_dir.display())))?;
        for i in 0..count {
            let kind = ShapeKind::from_index(i);
            let (cloud, part_labels) = sample_labeled(kind, n_points, seed.wrapping_add(i as u64));
            let stem = format!("{}_{i:04}", kind.name());
            std::fs::write(parts_dir.join(format!("{stem}.ply")), write_ply(&cloud))
                .map_err(|e| CliError::input(format!("cannot write cloud: {e}")))?;
            let seg: String = part_labels.iter().map(|l| format!("{l}\n")).collect();
            std::fs::write(parts_dir.join(format!("{stem}.seg")), seg)
                .map_err(|e| CliError::input(format!("cannot write seg: {e}")))?;
        }
    }
    println!("wrote {count} meshes, labels.txt{} into {}",
        if args.parts_points.or(section.parts_points).is_some() { ", parts/" } else { "" },
        args.out.display());
    Ok(())
}
