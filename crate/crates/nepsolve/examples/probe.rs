// Development scratch pad; removed before release.
use nepsolve::gallery::{many_term_spmf, nep_gallery, GalleryParams};
use nepsolve::linalg::cplx;
use nepsolve::nep::{Nep, SolveOptions};
use nepsolve::solvers::{
    augnewton, beyn_contour, iar, iar_chebyshev, mslp, nlar, quasinewton, resinv,
    solve_k_eigenpairs, ContourSpec,
};
use nepsolve::types::make_derspmf;
use std::time::Instant;

fn main() {
    let p = GalleryParams::new();

    // 1. 5x5 three-term problem from lambda0 = 1.
    let g5 = nep_gallery("spmf_5x5", &p).unwrap();
    let mut opts = SolveOptions::with_target(cplx(1.0, 0.0));
    opts.tol = 1e-10;
    let t0 = Instant::now();
    match mslp(&g5, &opts) {
        Ok(out) => println!(
            "mslp 5x5: lambda = {} residual {:.2e} iters {} ({:?})",
            out.eigenpairs[0].lambda,
            out.residuals[0],
            out.iterations,
            t0.elapsed()
        ),
        Err(e) => println!("mslp 5x5 FAILED: {e}"),
    }
    let t0 = Instant::now();
    let mut gopts = opts.clone();
    gopts.v0 = Some(nepsolve::CVector::from_fn(5, |i, _| {
        cplx(1.0 + 0.37 * i as f64, 0.11 * (i as f64) * (i as f64) - 0.2)
    }));
    match augnewton(&g5, &gopts) {
        Ok(out) => println!(
            "augnewton 5x5: lambda = {} residual {:.2e} iters {} ({:?})",
            out.eigenpairs[0].lambda,
            out.residuals[0],
            out.iterations,
            t0.elapsed()
        ),
        Err(e) => println!("augnewton 5x5 FAILED: {e}"),
    }

    // 2. dep0: solve, deflate, solve again.
    let dep0 = nep_gallery("dep0", &p).unwrap();
    let opts0 = SolveOptions::default();
    match solve_k_eigenpairs(&dep0, 2, &opts0) {
        Ok(out) => {
            let s1 = out.eigenpairs[0].lambda;
            let s2 = out.eigenpairs[1].lambda;
            let m = dep0.compute_mder(s2, 0).unwrap();
            let smin = nepsolve::linalg::min_singular_value(&m);
            println!(
                "deflation workflow: s1 = {s1}, s2 = {s2}, |s1-s2| = {:.3e}, smin(M(s2)) = {:.3e}",
                (s1 - s2).norm(),
                smin
            );
        }
        Err(e) => println!("solve_k FAILED: {e}"),
    }

    // 3. iar on dep0.
    let mut kopts = SolveOptions::default();
    kopts.tol = 1e-10;
    kopts.maxit = Some(40);
    match iar(&dep0, &kopts) {
        Ok(out) => {
            println!("iar dep0: {} converged", out.eigenpairs.len());
            for (pair, r) in out.eigenpairs.iter().zip(&out.residuals) {
                println!("   lambda = {} residual {:.2e}", pair.lambda, r);
            }
        }
        Err(e) => println!("iar dep0 FAILED: {e}"),
    }

    // 4. iar_chebyshev on dep0.
    match iar_chebyshev(&dep0, &kopts) {
        Ok(out) => {
            println!("iar_chebyshev dep0: {} converged", out.eigenpairs.len());
            for (pair, r) in out.eigenpairs.iter().zip(&out.residuals) {
                println!("   lambda = {} residual {:.2e}", pair.lambda, r);
            }
        }
        Err(e) => println!("iar_chebyshev dep0 FAILED: {e}"),
    }

    // 5. neuron0 with sigma = -2 in the Chebyshev basis.
    let neuron = nep_gallery("neuron0", &p).unwrap();
    let mut nopts = SolveOptions::with_target(cplx(-2.0, 0.0));
    nopts.tol = 1e-10;
    nopts.maxit = Some(100);
    let t0 = Instant::now();
    match iar_chebyshev(&neuron, &nopts) {
        Ok(out) => {
            println!(
                "iar_chebyshev neuron0: {} converged in {:?}",
                out.eigenpairs.len(),
                t0.elapsed()
            );
            let mut ls: Vec<_> = out.eigenpairs.iter().map(|p| p.lambda).collect();
            ls.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
            for l in ls {
                println!("   {:.6} {:+.6}i", l.re, l.im);
            }
        }
        Err(e) => println!("iar_chebyshev neuron0 FAILED: {e}"),
    }

    // 6. beyn on pep0 (n=3 for speed).
    let mut pp = GalleryParams::new();
    pp.insert("n".into(), 3.0);
    let pep = nep_gallery("pep0", &pp).unwrap();
    let contour = ContourSpec::circle(cplx(0.0, 0.0), 3.0)
        .with_quad_points(256)
        .with_probe_rank(3);
    match beyn_contour(&pep, &contour, &opts0) {
        Ok(out) => {
            println!("beyn pep0(3): {} inside", out.eigenpairs.len());
            for (pair, r) in out.eigenpairs.iter().zip(&out.residuals) {
                println!("   lambda = {} residual {:.2e}", pair.lambda, r);
            }
        }
        Err(e) => println!("beyn FAILED: {e}"),
    }

    // 7. resinv / quasinewton / nlar smoke on dep0.
    let mut sopts = SolveOptions::with_target(cplx(-0.5, 0.0));
    sopts.tol = 1e-11;
    for (name, res) in [
        ("resinv", resinv(&dep0, &sopts)),
        ("quasinewton", quasinewton(&dep0, &sopts)),
        ("nlar", nlar(&dep0, &sopts)),
    ] {
        match res {
            Ok(out) => println!(
                "{name} dep0: lambda = {} residual {:.2e}",
                out.eigenpairs[0].lambda, out.residuals[0]
            ),
            Err(e) => println!("{name} dep0 FAILED: {e}"),
        }
    }

    // 8. many-term timing probe (reduced size first).
    let spmf = many_term_spmf(50, 200, 0.01, 0).unwrap();
    let mut mopts = SolveOptions::default();
    mopts.tol = 1e-10;
    mopts.maxit = Some(30);
    let t0 = Instant::now();
    let raw = iar(&spmf, &mopts);
    let raw_t = t0.elapsed();
    let d = make_derspmf(&spmf, cplx(0.0, 0.0), 30).unwrap();
    let t0 = Instant::now();
    let wrapped = iar(&d, &mopts);
    let wrapped_t = t0.elapsed();
    println!(
        "many-term maxit=30: raw {:?} ({:?} pairs), wrapped {:?} ({:?} pairs)",
        raw_t,
        raw.map(|o| o.eigenpairs.len()).map_err(|e| e.to_string()),
        wrapped_t,
        wrapped.map(|o| o.eigenpairs.len()).map_err(|e| e.to_string()),
    );
}
