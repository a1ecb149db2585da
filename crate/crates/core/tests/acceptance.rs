//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the report is always shown.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::{DMatrix, DVector};
use pcakit::kernels::{delta_kernel, KernelSpec};
use pcakit::linalg::{center_data, double_center_rect, left_center, right_center, DataMatrix};
use pcakit::pca::{self, LinearSubspaceModel, PcaOptions};
use pcakit::spca::{self, SpcaOptions};
use pcakit::{dual_pca, kernel_pca, kernel_spca};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn data(m: DMatrix<f64>) -> DataMatrix {
    DataMatrix::new(m).expect("finite test data")
}

fn column(x: &DataMatrix, j: usize) -> DataMatrix {
    data(x.as_matrix().columns(j, 1).into_owned())
}

fn centering_worked_example() -> Check {
    let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 3.0, 1.0]);
    let reference = [
        ("HA", left_center(&a), [-1.5, -0.5, 1.0, 1.5, 0.5, -1.0]),
        ("AH", right_center(&a), [-1.0, 0.0, 1.0, 1.34, 0.34, -1.66]),
        ("HAH", double_center_rect(&a), [-1.17, -0.17, 1.33, 1.17, 0.17, -1.33]),
    ];
    let mut worst: f64 = 0.0;
    for (name, got, want) in reference {
        let want = DMatrix::from_row_slice(2, 3, &want);
        let err = max_abs_diff(&got, &want);
        ensure(err <= 0.01, || format!("{name} off by {err:.4}"))?;
        worst = worst.max(err);
    }
    Ok(format!("max deviation from reference values {worst:.4}"))
}

fn eig_svd_agreement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst_dir: f64 = 0.0;
    let mut worst_val: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.random_range(2..=40);
        let n = rng.random_range(3..=40);
        let r = d.min(n - 1);
        let pl = planted(&mut rng, d, n, r);
        let x = data(pl.x.clone());
        let e = pca::fit_pca_eig(&x, r).map_err(|e| e.to_string())?;
        let s = pca::fit_pca_svd(&x, r).map_err(|e| e.to_string())?;
        let dir = max_abs_diff(&sign_match(&s.directions, &e.directions), &e.directions);
        let oracle = max_abs_diff(&sign_match(&e.directions, &pl.q), &pl.q);
        worst_dir = worst_dir.max(dir).max(oracle);
        for i in 0..r {
            let want = pl.sigma[i] * pl.sigma[i];
            worst_val = worst_val
                .max(rel_diff(e.spectrum[i], s.spectrum[i]))
                .max(rel_diff(e.spectrum[i], want));
        }
    }
    ensure(worst_dir <= 1e-8, || format!("direction mismatch {worst_dir:.2e}"))?;
    ensure(worst_val <= 1e-8, || format!("spectrum mismatch {worst_val:.2e}"))?;
    Ok(format!("directions {worst_dir:.1e}, spectra {worst_val:.1e} relative"))
}

fn pca_dual_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst: f64 = 0.0;
    for t in 0..50 {
        let (d, n) = if t % 5 == 0 {
            (200, 10)
        } else {
            (rng.random_range(2..=30), rng.random_range(3..=30))
        };
        let r = d.min(n - 1);
        let p = rng.random_range(1..=r);
        let pl = planted(&mut rng, d, n, r);
        let x = data(pl.x.clone());
        let xt = data(random_matrix(&mut rng, d, 4) * 5.0);
        let direct = pca::fit_pca_eig(&x, p).map_err(|e| e.to_string())?;
        let dual = dual_pca::fit_dual(&x, p).map_err(|e| e.to_string())?;

        let want = pca::project(&direct, &x).unwrap().entries;
        let got = dual_pca::project_train(&dual).entries;
        worst = worst.max(max_abs_diff(&sign_match_rows(&got, &want), &want));

        let want_t = pca::project(&direct, &xt).unwrap().entries;
        let got_t = dual_pca::project_oos(&dual, &xt).unwrap().entries;
        worst = worst.max(max_abs_diff(&sign_match_rows(&got_t, &want_t), &want_t));

        let rec = pca::reconstruct(&direct, &pca::project(&direct, &x).unwrap()).unwrap();
        let rec_d = dual_pca::reconstruct_train(&dual).unwrap();
        worst = worst.max(max_abs_diff(rec.as_matrix(), rec_d.as_matrix()));

        let rec_t = pca::reconstruct(&direct, &pca::project(&direct, &xt).unwrap()).unwrap();
        let rec_td = dual_pca::reconstruct_oos(&dual, &xt).unwrap();
        worst = worst.max(max_abs_diff(rec_t.as_matrix(), rec_td.as_matrix()));
    }
    ensure(worst <= 1e-7, || format!("max disagreement {worst:.2e}"))?;
    Ok(format!("max disagreement {worst:.1e} over four operations"))
}

fn linear_kpca_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(2..=25);
        let n = rng.random_range(4..=25);
        let r = d.min(n - 1);
        let p = rng.random_range(1..=r);
        let x = data(planted(&mut rng, d, n, r).x);
        let xt = data(random_matrix(&mut rng, d, 5) * 4.0);
        let k = kernel_pca::fit_kpca(&x, &KernelSpec::linear(), p).map_err(|e| e.to_string())?;
        let dual = dual_pca::fit_dual(&x, p).map_err(|e| e.to_string())?;
        let want = dual_pca::project_train(&dual).entries;
        let got = kernel_pca::project_train(&k).entries;
        worst = worst.max(max_abs_diff(&sign_match_rows(&got, &want), &want));
        let want_t = dual_pca::project_oos(&dual, &xt).unwrap().entries;
        let got_t = kernel_pca::project_oos(&k, &xt).unwrap().entries;
        worst = worst.max(max_abs_diff(&sign_match_rows(&got_t, &want_t), &want_t));
    }
    ensure(worst <= 1e-7, || format!("max disagreement {worst:.2e}"))?;
    Ok(format!("max disagreement {worst:.1e}"))
}

fn spca_identity_is_pca() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(2..=20);
        let n = rng.random_range(4..=30);
        let r = d.min(n - 1);
        let p = rng.random_range(1..=r);
        let x = data(planted(&mut rng, d, n, r).x);
        let ky = DMatrix::identity(n, n);
        let s = spca::fit_spca_with(&x, &ky, p, SpcaOptions { center: true }).map_err(|e| e.to_string())?;
        let pc = pca::fit_pca_eig(&x, p).map_err(|e| e.to_string())?;
        worst = worst.max((projector(&s.directions) - projector(&pc.directions)).norm());
    }
    ensure(worst <= 1e-7, || format!("projector difference {worst:.2e}"))?;
    Ok(format!("projector Frobenius difference {worst:.1e}"))
}

fn reconstruction_optimality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut margin = f64::INFINITY;
    for _ in 0..20 {
        let d = rng.random_range(3..=15);
        let n = rng.random_range(5..=30);
        let p = rng.random_range(1..d.min(n - 1).max(2));
        let x = data(random_matrix(&mut rng, d, n) * 2.0);
        let model = pca::fit_pca_eig(&x, p).map_err(|e| e.to_string())?;
        let best = pca::reconstruction_error(&model, &x).unwrap();
        let mean = center_data(&x).mean;
        for trial in 0..100 {
            let random = LinearSubspaceModel {
                directions: orthonormal(&mut rng, d, p),
                mean: mean.clone(),
                spectrum: DVector::zeros(p),
                centered: true,
            };
            let err = pca::reconstruction_error(&random, &x).unwrap();
            ensure(best <= err, || format!("random basis {trial} beat PCA: {err} < {best}"))?;
            margin = margin.min((err - best) / err);
        }
    }
    Ok(format!("2000 random bases, smallest relative margin {margin:.2e}"))
}

fn trace_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(3..=20);
        let n = rng.random_range(5..=30);
        let r = d.min(n - 1);
        let p = rng.random_range(1..=r);
        let pl = planted(&mut rng, d, n, r);
        let x = data(pl.x.clone());

        // PCA: scatter spectrum is sigma^2 by construction
        let m = pca::fit_pca_eig(&x, p).map_err(|e| e.to_string())?;
        let s = pca::scatter_matrix(&x).unwrap();
        let lhs = (m.directions.transpose() * &s * &m.directions).trace();
        let rhs: f64 = pl.sigma[..p].iter().map(|v| v * v).sum();
        worst = worst.max(rel_diff(lhs, rhs));

        // SPCA: with Ky = W diag(kappa) W^T the operator is Q diag(sigma^2 kappa) Q^T
        let kappa: Vec<f64> = (0..r).map(|_| 0.5 + rng.random::<f64>()).collect();
        let ky = &pl.w * DMatrix::from_diagonal(&DVector::from_column_slice(&kappa)) * pl.w.transpose();
        let model = spca::fit_spca(&x, &ky, p).map_err(|e| e.to_string())?;
        let op = spca::spca_operator(&x, &ky).unwrap();
        let lhs = (model.directions.transpose() * &op * &model.directions).trace();
        let mut eig: Vec<f64> = (0..r).map(|i| pl.sigma[i] * pl.sigma[i] * kappa[i]).collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let rhs: f64 = eig[..p].iter().sum();
        worst = worst.max(rel_diff(lhs, rhs));
    }
    ensure(worst <= 1e-8, || format!("trace identity off by {worst:.2e}"))?;
    Ok(format!("PCA and HSIC trace identities within {worst:.1e} relative"))
}

fn replayed_columns() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let d = 6;
    let n = 24;
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let x = data(random_matrix(&mut rng, d, n) * 2.0);
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let ky = delta_kernel(&labels).unwrap().entries;
    let rbf = KernelSpec::Rbf { gamma: 0.2 };
    let p = 2;
    let err = |e: pcakit::Error| e.to_string();

    let mut linear: f64 = 0.0;
    let mut kernel: f64 = 0.0;
    let cols = [0, 7, 23];

    let m = pca::fit_pca_eig(&x, p).map_err(err)?;
    let train = pca::project(&m, &x).unwrap().entries;
    for &j in &cols {
        let e = pca::project(&m, &column(&x, j)).unwrap().entries;
        linear = linear.max(max_abs_diff(&e, &train.columns(j, 1).into_owned()));
    }
    let m = dual_pca::fit_dual(&x, p).map_err(err)?;
    let train = dual_pca::project_train(&m).entries;
    for &j in &cols {
        let e = dual_pca::project_oos(&m, &column(&x, j)).unwrap().entries;
        linear = linear.max(max_abs_diff(&e, &train.columns(j, 1).into_owned()));
    }
    let m = spca::fit_scoring_spca(&x, &y, 4, p, PcaOptions::default()).map_err(err)?;
    let train = spca::scoring_spca_project(&m, &x).unwrap().entries;
    for &j in &cols {
        let e = spca::scoring_spca_project(&m, &column(&x, j)).unwrap().entries;
        linear = linear.max(max_abs_diff(&e, &train.columns(j, 1).into_owned()));
    }
    let m = spca::fit_spca(&x, &ky, p).map_err(err)?;
    let train = spca::spca_project(&m, &x).unwrap().entries;
    for &j in &cols {
        let e = spca::spca_project(&m, &column(&x, j)).unwrap().entries;
        linear = linear.max(max_abs_diff(&e, &train.columns(j, 1).into_owned()));
    }
    let m = spca::fit_dual_spca(&x, &ky, p).map_err(err)?;
    let train = spca::dual_spca_project(&m, &x).unwrap().entries;
    for &j in &cols {
        let e = spca::dual_spca_project(&m, &column(&x, j)).unwrap().entries;
        linear = linear.max(max_abs_diff(&e, &train.columns(j, 1).into_owned()));
    }

    let m = kernel_pca::fit_kpca(&x, &rbf, p).map_err(err)?;
    let train = kernel_pca::project_train(&m).entries;
    for &j in &cols {
        let e = kernel_pca::project_oos(&m, &column(&x, j)).unwrap().entries;
        kernel = kernel.max(max_abs_diff(&e, &train.columns(j, 1).into_owned()));
    }
    let m = kernel_spca::fit_kspca_direct(&x, &rbf, &ky, p).map_err(err)?;
    let train = kernel_spca::project_direct_train(&m).entries;
    for &j in &cols {
        let e = kernel_spca::project_direct(&m, &column(&x, j)).unwrap().entries;
        kernel = kernel.max(max_abs_diff(&e, &train.columns(j, 1).into_owned()));
    }
    let m = kernel_spca::fit_kspca_dual(&x, &rbf, &ky, p).map_err(err)?;
    let train = kernel_spca::project_dual_train(&m).entries;
    for &j in &cols {
        let e = kernel_spca::project_dual(&m, &column(&x, j)).unwrap().entries;
        kernel = kernel.max(max_abs_diff(&e, &train.columns(j, 1).into_owned()));
    }
    ensure(linear <= 1e-9, || format!("linear methods off by {linear:.2e}"))?;
    ensure(kernel <= 1e-7, || format!("kernel methods off by {kernel:.2e}"))?;
    Ok(format!("linear {linear:.1e}, kernel {kernel:.1e}"))
}

fn dual_direct_spca() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(2..=20);
        let n = rng.random_range(6..=30);
        let classes = rng.random_range(2..=5);
        let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
        let ky = delta_kernel(&labels).unwrap().entries;
        let x = data(random_matrix(&mut rng, d, n) * 2.0);
        let xt = data(random_matrix(&mut rng, d, 3));
        let rank = d.min(classes - 1);
        let p = rng.random_range(1..=rank);
        let direct = spca::fit_spca(&x, &ky, p).map_err(|e| e.to_string())?;
        let dual = spca::fit_dual_spca(&x, &ky, p).map_err(|e| e.to_string())?;
        for arg in [&x, &xt] {
            let want = spca::spca_project(&direct, arg).unwrap().entries;
            let got = spca::dual_spca_project(&dual, arg).unwrap().entries;
            worst = worst.max(max_abs_diff(&sign_match_rows(&got, &want), &want));
            let want = spca::spca_reconstruct(&direct, arg).unwrap();
            let got = spca::dual_spca_reconstruct(&dual, arg).unwrap();
            worst = worst.max(max_abs_diff(got.as_matrix(), want.as_matrix()));
        }
    }
    ensure(worst <= 1e-6, || format!("max disagreement {worst:.2e}"))?;
    Ok(format!("max disagreement {worst:.1e}"))
}

fn blobs(rng: &mut ChaCha8Rng, d: usize, n: usize, classes: usize) -> (DataMatrix, Vec<usize>) {
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let centers = random_matrix(rng, d, classes) * 2.0;
    let x = DMatrix::from_fn(d, n, |i, j| centers[(i, labels[j])] + gaussian(rng));
    (data(x), labels)
}

fn kernel_spca_routes() -> Check {
    let mut worst = f64::INFINITY;
    let mut scores = Vec::new();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let (x, labels) = blobs(&mut rng, 5, 40, 3);
        let ky = delta_kernel(&labels).unwrap().entries;
        let spec = KernelSpec::Rbf { gamma: 0.1 };
        let a = kernel_spca::fit_kspca_direct(&x, &spec, &ky, 2).map_err(|e| e.to_string())?;
        let b = kernel_spca::fit_kspca_dual(&x, &spec, &ky, 2).map_err(|e| e.to_string())?;
        let c = mean_canonical_correlation(
            &kernel_spca::project_direct_train(&a).entries,
            &kernel_spca::project_dual_train(&b).entries,
        );
        scores.push(c);
        worst = worst.min(c);
    }
    ensure(worst >= 0.99, || format!("canonical correlations {scores:?}"))?;
    Ok(format!("lowest mean canonical correlation {worst:.6}"))
}

fn supervised_separation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let (d, n) = (10, 150);
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    // class means one noise standard deviation apart in the first two
    // coordinates; the other eight carry larger class-independent noise
    let means = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.75f64.sqrt()]];
    let x = DMatrix::from_fn(d, n, |i, j| {
        if i < 2 {
            means[labels[j]][i] + gaussian(&mut rng)
        } else {
            3.0 * gaussian(&mut rng)
        }
    });
    let x = data(x);
    let ky = delta_kernel(&labels).unwrap().entries;
    let s = spca::fit_spca(&x, &ky, 2).map_err(|e| e.to_string())?;
    let p = pca::fit_pca_eig(&x, 2).map_err(|e| e.to_string())?;
    let rs = scatter_ratio(&spca::spca_project(&s, &x).unwrap().entries, &labels);
    let rp = scatter_ratio(&pca::project(&p, &x).unwrap().entries, &labels);
    ensure(rs > rp, || format!("SPCA ratio {rs:.4} not above PCA ratio {rp:.4}"))?;
    Ok(format!("scatter ratio SPCA {rs:.4} vs PCA {rp:.4}"))
}

fn autoencoder_collapse() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3004);
    let (d, n) = (12, 20);
    let x = data(random_matrix(&mut rng, d, n) * 3.0);
    let c = center_data(&x);
    let layers = [orthonormal(&mut rng, 12, 8), orthonormal(&mut rng, 8, 5), orthonormal(&mut rng, 5, 3)];
    let mut code = c.entries.clone();
    for u in &layers {
        code = u.transpose() * code;
    }
    let mut stacked = code;
    for u in layers.iter().rev() {
        stacked = u * stacked;
    }
    let u = pca::compose_linear_layers(&layers).map_err(|e| e.to_string())?;
    let collapsed = &u * u.transpose() * &c.entries;
    let err = max_abs_diff(&stacked, &collapsed);
    ensure(err <= 1e-9, || format!("stacked and collapsed differ by {err:.2e}"))?;
    Ok(format!("m = 3 stacked vs collapsed {err:.1e}"))
}

fn read_embedding(path: &Path) -> DMatrix<f64> {
    let mut rdr = csv::Reader::from_path(path).expect("embedding csv");
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|c| c.parse().unwrap()).collect())
        .collect();
    DMatrix::from_fn(rows[0].len(), rows.len(), |i, j| rows[j][i])
}

fn cli_round_trip() -> Check {
    let bin = env!("CARGO_BIN_EXE_pcakit");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3005);
    let (x, labels) = blobs(&mut rng, 4, 30, 3);
    let names = ["a", "b", "c"];
    let csv_path = dir.path().join("train.csv");
    {
        let mut w = csv::Writer::from_path(&csv_path).unwrap();
        w.write_record(["f1", "f2", "f3", "f4", "class"]).unwrap();
        for j in 0..30 {
            let mut rec: Vec<String> = (0..4).map(|i| format!("{:.16e}", x.as_matrix()[(i, j)])).collect();
            rec.push(names[labels[j]].to_string());
            w.write_record(&rec).unwrap();
        }
    }
    let ky = delta_kernel(&labels).unwrap().entries;
    let rbf = KernelSpec::Rbf { gamma: 0.5 };
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let library: Vec<(&str, Vec<&str>, DMatrix<f64>, bool)> = vec![
        ("pca", vec![], pca::project(&pca::fit_pca_eig(&x, 2).unwrap(), &x).unwrap().entries, false),
        ("dual-pca", vec![], dual_pca::project_train(&dual_pca::fit_dual(&x, 2).unwrap()).entries, false),
        (
            "kpca",
            vec!["--kernel", "rbf", "--gamma", "0.5"],
            kernel_pca::project_train(&kernel_pca::fit_kpca(&x, &rbf, 2).unwrap()).entries,
            true,
        ),
        (
            "spca-scoring",
            vec!["--top-q", "3"],
            {
                let m = spca::fit_scoring_spca(&x, &y, 3, 2, PcaOptions::default()).unwrap();
                spca::scoring_spca_project(&m, &x).unwrap().entries
            },
            false,
        ),
        ("spca", vec![], spca::spca_project(&spca::fit_spca(&x, &ky, 2).unwrap(), &x).unwrap().entries, false),
        (
            "dual-spca",
            vec![],
            spca::dual_spca_project(&spca::fit_dual_spca(&x, &ky, 2).unwrap(), &x).unwrap().entries,
            false,
        ),
        (
            "kspca-direct",
            vec!["--kernel", "rbf", "--gamma", "0.5"],
            kernel_spca::project_direct_train(&kernel_spca::fit_kspca_direct(&x, &rbf, &ky, 2).unwrap()).entries,
            true,
        ),
        (
            "kspca-dual",
            vec!["--kernel", "rbf", "--gamma", "0.5"],
            kernel_spca::project_dual_train(&kernel_spca::fit_kspca_dual(&x, &rbf, &ky, 2).unwrap()).entries,
            true,
        ),
    ];
    let mut worst: f64 = 0.0;
    for (method, extra, want, is_kernel) in library {
        let model = dir.path().join(format!("{method}.json"));
        let out = dir.path().join(format!("{method}.csv"));
        let mut fit = Command::new(bin);
        fit.arg("fit").arg(&csv_path).args(["--method", method, "--components", "2"]);
        fit.args(["--labels", "class"]);
        let status = fit.args(&extra).arg("--model").arg(&model).output().unwrap();
        ensure(status.status.success(), || {
            format!("fit {method} failed: {}", String::from_utf8_lossy(&status.stderr))
        })?;
        let status = Command::new(bin)
            .arg("transform")
            .arg(&csv_path)
            .args(["--labels", "class"])
            .arg("--model")
            .arg(&model)
            .arg("--output")
            .arg(&out)
            .output()
            .unwrap();
        ensure(status.status.success(), || format!("transform {method} failed"))?;
        let got = read_embedding(&out);
        let err = max_abs_diff(&got, &want);
        ensure(err <= 1e-12, || format!("{method}: CLI embedding off by {err:.2e}"))?;
        worst = worst.max(err);

        let rec = Command::new(bin)
            .arg("reconstruct")
            .arg(&csv_path)
            .args(["--labels", "class"])
            .arg("--model")
            .arg(&model)
            .output()
            .unwrap();
        if is_kernel {
            ensure(rec.status.code() == Some(5), || {
                format!("reconstruct under {method} exited with {:?}", rec.status.code())
            })?;
        }
    }
    Ok(format!("eight methods, max deviation {worst:.1e}; kernel reconstruct exits 5"))
}

fn planted_label_feature() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3006);
    for trial in 0..100 {
        let d = rng.random_range(2..=30);
        let n = rng.random_range(4..=60);
        let mut y: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        let mut x = random_matrix(&mut rng, d, n) * rng.random_range(0.5..3.0);
        let planted_at = rng.random_range(0..d);
        for (j, v) in y.iter().enumerate() {
            x[(planted_at, j)] = *v;
        }
        let scores = spca::score_features(&data(x), &y).map_err(|e| e.to_string())?;
        ensure(scores.order[0] == planted_at, || {
            format!("trial {trial}: feature {} outscored the planted feature {planted_at}", scores.order[0])
        })?;
    }
    Ok("planted feature ranked first in 100/100 trials".into())
}

type Criterion = (&'static str, Duration, fn() -> Check);

fn main() {
    let criteria: [Criterion; 14] = [
        ("centering worked example", Duration::from_millis(1), centering_worked_example),
        ("PCA eig/SVD agreement", Duration::from_secs(1), eig_svd_agreement),
        ("PCA equals dual PCA", Duration::from_secs(2), pca_dual_equivalence),
        ("linear kernel PCA equals dual PCA", Duration::from_secs(1), linear_kpca_equivalence),
        ("SPCA with identity label kernel equals PCA", Duration::from_secs(1), spca_identity_is_pca),
        ("reconstruction optimality", Duration::from_secs(2), reconstruction_optimality),
        ("trace identities", Duration::from_secs(1), trace_identities),
        ("out-of-sample consistency", Duration::from_secs(1), replayed_columns),
        ("dual/direct SPCA agreement", Duration::from_secs(1), dual_direct_spca),
        ("kernel SPCA route similarity", Duration::from_secs(2), kernel_spca_routes),
        ("supervised separation", Duration::from_secs(1), supervised_separation),
        ("linear autoencoder collapse", Duration::from_secs(1), autoencoder_collapse),
        ("CLI round trip", Duration::from_secs(1), cli_round_trip),
        ("scoring SPCA planted feature", Duration::from_secs(1), planted_label_feature),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.3} s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
