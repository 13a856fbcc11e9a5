// Development scratch pad; removed before release.
use nepsolve::gallery::{nep_gallery, GalleryParams};
use nepsolve::linalg::{cplx, CMatrix, CVector};
use nepsolve::nep::{Nep, SolveOptions};
use nepsolve::solvers::chebyshev::{integration_matrix, ChebyshevFrame};
use nepsolve::solvers::{beyn_contour, iar_chebyshev, ContourSpec};
use nepsolve::types::Spmf;

/// Coefficients of T_j as a polynomial in theta (row j holds T_j).
fn cheb_to_mono(k: usize) -> CMatrix {
    let mut t = CMatrix::zeros(k, k);
    t[(0, 0)] = cplx(1.0, 0.0);
    if k > 1 {
        t[(1, 1)] = cplx(1.0, 0.0);
    }
    for j in 2..k {
        // T_j = 2 theta T_{j-1} - T_{j-2}
        for c in 0..k {
            let shifted = if c > 0 { t[(j - 1, c - 1)] } else { cplx(0.0, 0.0) };
            t[(j, c)] = cplx(2.0, 0.0) * shifted - t[(j - 2, c)];
        }
    }
    t
}

fn taylor_step(spmf: &Spmf, sigma: cplx_t, alpha: cplx_t, x_mono: &CMatrix) -> CMatrix {
    // One infinite Arnoldi expansion in the monomial basis for the
    // shifted/scaled problem M(sigma + alpha * t).
    let n = x_mono.nrows();
    let j = x_mono.ncols();
    let mut y = CMatrix::zeros(n, j + 1);
    for i in 0..j {
        let c = x_mono.column(i) / cplx((i + 1) as f64, 0.0);
        y.set_column(i + 1, &c);
    }
    let mut coeffs = vec![cplx(0.0, 0.0); j + 1];
    for (i, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = alpha.powu(i as u32);
    }
    let z = spmf.compute_mlincomb_scaled(sigma, &y, &coeffs).unwrap();
    let fact = spmf.factorize(sigma).unwrap();
    let y0 = -fact.solve(&z).unwrap();
    y.set_column(0, &y0);
    y
}

type cplx_t = nepsolve::linalg::Complex64;

fn main() {
    let dep0 = nep_gallery("dep0", &GalleryParams::new()).unwrap();
    let spmf = dep0.to_spmf();
    let n = spmf.size();
    let sigma = cplx(0.0, 0.0);
    let alpha = cplx(0.25, 0.0);

    // One Chebyshev step on random-ish data, checked against the Taylor
    // step through the basis conversion.
    let j = 6usize;
    let x_cheb = CMatrix::from_fn(n, j, |i, c| cplx(0.1 * (i + c) as f64 - 0.2, 0.05 * i as f64));

    // Chebyshev step (mirrors the solver's internals).
    let frame = ChebyshevFrame::new(j, sigma, alpha).unwrap();
    let b = frame.b_matrices(&spmf).unwrap();
    let l = integration_matrix(j);
    let mut y_cheb = CMatrix::zeros(n, j + 1);
    let lc = CMatrix::from_fn(j, j, |r, c| cplx(l[(r, c)], 0.0));
    let integrated = &x_cheb * lc;
    y_cheb.view_mut((0, 1), (n, j)).copy_from(&integrated);
    let mut xpad = CMatrix::zeros(n, j + 1);
    xpad.view_mut((0, 0), (n, j)).copy_from(&x_cheb);
    let theta = frame.theta0();
    let mut t = CVector::zeros(n);
    for (a, bi) in spmf.matrices().iter().zip(&b) {
        t += a * (&xpad * (bi * theta));
    }
    let fact = spmf.factorize(sigma).unwrap();
    let y0 = fact.solve(&t).unwrap() - &y_cheb * theta;
    y_cheb.set_column(0, &y0);

    // Taylor step on the converted data.
    let conv_in = cheb_to_mono(j);
    let x_mono = &x_cheb * &conv_in;
    let y_mono = taylor_step(&spmf, sigma, alpha, &x_mono);
    // Convert the Chebyshev result to monomial coefficients.
    let conv_out = cheb_to_mono(j + 1);
    let y_cheb_mono = &y_cheb * &conv_out;
    println!(
        "one-step equivalence: rel diff {:.3e}",
        (y_cheb_mono.clone() - &y_mono).norm() / y_mono.norm()
    );
    println!("  cheb branch col0 head: {:?}", y_cheb_mono.column(0)[0]);
    println!("  mono branch col0 head: {:?}", y_mono.column(0)[0]);

    // Chebyshev solver diagnostics at maxit 28.
    let mut opts = SolveOptions::default();
    opts.tol = 1e-10;
    opts.maxit = Some(28);
    match iar_chebyshev(&spmf, &opts) {
        Ok(out) => {
            println!("cheb maxit=28 converged {} pairs", out.eigenpairs.len());
        }
        Err(nepsolve::SolverError::NoConvergence { outcome, .. }) => {
            println!("cheb maxit=28: all Ritz errors:");
            for (p, r) in outcome.eigenpairs.iter().zip(&outcome.residuals).take(12) {
                println!("   lambda = {:.6} {:+.6}i  err {:.2e}", p.lambda.re, p.lambda.im, r);
            }
        }
        Err(e) => println!("cheb failed: {e}"),
    }

    // Beyn diagnostics on pep0 n=3.
    let mut pp = GalleryParams::new();
    pp.insert("n".into(), 3.0);
    let pep = nep_gallery("pep0", &pp).unwrap();
    // Oracle: companion linearization eigenvalues.
    let nepsolve::gallery::GalleryNep::Pep(p) = &pep else { panic!() };
    let a0 = &p.coefficients()[0];
    let a1 = &p.coefficients()[1];
    let a2 = &p.coefficients()[2];
    let lu = a2.clone().lu();
    let b0 = lu.solve(a0).unwrap();
    let b1 = lu.solve(a1).unwrap();
    let mut comp = CMatrix::zeros(6, 6);
    comp.view_mut((0, 3), (3, 3)).copy_from(&CMatrix::identity(3, 3));
    comp.view_mut((3, 0), (3, 3)).copy_from(&(-&b0));
    comp.view_mut((3, 3), (3, 3)).copy_from(&(-&b1));
    let (oracle, _) = nepsolve::linalg::eig(&comp).unwrap();
    println!("companion oracle eigenvalues:");
    for l in oracle.iter() {
        println!("   {:.6} {:+.6}i  |l| = {:.3}", l.re, l.im, l.norm());
    }
    let rmax = oracle.iter().map(|l| l.norm()).fold(0.0f64, f64::max);
    let contour = ContourSpec::circle(cplx(0.0, 0.0), rmax * 1.3)
        .with_quad_points(256)
        .with_probe_rank(3);
    match beyn_contour(&pep, &contour, &SolveOptions::default()) {
        Ok(out) => {
            println!("beyn: {} pairs inside radius {:.3}", out.eigenpairs.len(), rmax * 1.3);
            for (p, r) in out.eigenpairs.iter().zip(&out.residuals) {
                println!("   lambda = {:.6} {:+.6}i  err {:.2e}", p.lambda.re, p.lambda.im, r);
            }
        }
        Err(e) => println!("beyn failed: {e}"),
    }
}
