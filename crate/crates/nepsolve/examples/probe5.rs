// Development scratch pad; removed before release.
use nepsolve::gallery::{nep_gallery, GalleryParams};
use nepsolve::linalg::cplx;
use nepsolve::nep::SolveOptions;
use nepsolve::solvers::augnewton;
use nepsolve::CVector;
use std::sync::Arc;

fn main() {
    let g5 = nep_gallery("spmf_5x5", &GalleryParams::new()).unwrap();
    let mut opts = SolveOptions::with_target(cplx(1.0, 0.0));
    opts.tol = 1e-10;
    // Nullspace-estimate start: smallest right singular vector of M(1).
    let m1 = nepsolve::Nep::compute_mder(&g5, cplx(1.0, 0.0), 0).unwrap();
    let svd = m1.svd(true, true);
    let vt = svd.v_t.unwrap();
    let idx = (0..5)
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap();
    opts.v0 = Some(vt.row(idx).adjoint());
    opts.logger = Some(Arc::new(|it, err| {
        println!("  it {it}: err {err:.4e}");
    }));
    let probe_nep = g5.clone();
    opts.errmeasure = nepsolve::ErrMeasure::Custom(Arc::new(move |lambda, v| {
        let m = nepsolve::Nep::compute_mder(&probe_nep, lambda, 0).unwrap();
        let r = (&m * v).norm() / v.norm();
        println!("    eval at lambda = {lambda}: {r:.4e}");
        r
    }));
    match augnewton(&g5, &opts) {
        Ok(out) => println!(
            "augnewton 5x5 generic v0: {} residual {:.2e}",
            out.eigenpairs[0].lambda, out.residuals[0]
        ),
        Err(e) => println!("augnewton 5x5 generic v0 FAILED: {e}"),
    }

    // Same on dep0 from 0.
    let dep0 = nep_gallery("dep0", &GalleryParams::new()).unwrap();
    let mut d_opts = SolveOptions::default();
    d_opts.tol = 1e-12;
    match augnewton(&dep0, &d_opts) {
        Ok(out) => println!(
            "augnewton dep0: {} residual {:.2e} iters {}",
            out.eigenpairs[0].lambda, out.residuals[0], out.iterations
        ),
        Err(e) => println!("augnewton dep0 FAILED: {e}"),
    }
}
