// Development scratch pad; removed before release.
use nepsolve::gallery::{nep_gallery, GalleryParams};
use nepsolve::linalg::{cplx, CMatrix};
use nepsolve::nep::SolveOptions;
use nepsolve::solvers::chebyshev::{build_derivation_matrix, shifted_b_matrix, ChebyshevFrame};
use nepsolve::solvers::{iar, iar_chebyshev};
use nepsolve::types::MatFun;

fn main() {
    // Norm growth of the b-matrices with frame size.
    for n_deg in [5usize, 10, 15, 20, 30, 40] {
        let d = build_derivation_matrix(n_deg);
        let dc = CMatrix::from_fn(n_deg + 1, n_deg + 1, |i, j| cplx(d[(i, j)], 0.0));
        let f = MatFun::exp_scaled(cplx(-1.0, 0.0));
        let b = shifted_b_matrix(&f, &dc, cplx(0.0, 0.0), cplx(1.0, 0.0)).unwrap();
        println!(
            "N = {n_deg}: ||D|| = {:.3e}  ||b(D)|| = {:.3e}",
            dc.norm(),
            b.norm()
        );
    }

    // Does the b-matrix evaluated through the block trick match the
    // truncated series evaluated directly (both in f64)?
    let n_deg = 12;
    let d = build_derivation_matrix(n_deg);
    let dc = CMatrix::from_fn(n_deg + 1, n_deg + 1, |i, j| cplx(d[(i, j)], 0.0));
    let tau = 1.0;
    let f = MatFun::exp_scaled(cplx(-tau, 0.0));
    let via_block = shifted_b_matrix(&f, &dc, cplx(0.0, 0.0), cplx(1.0, 0.0)).unwrap();
    // series: b~(s) = (1 - e^{-tau s})/s = sum_{k>=0} -(-tau)^{k+1}/(k+1)! s^k
    let mut series = CMatrix::zeros(n_deg + 1, n_deg + 1);
    let mut power = CMatrix::identity(n_deg + 1, n_deg + 1);
    let mut fact = 1.0f64;
    for k in 0..=n_deg {
        fact *= (k + 1) as f64;
        let coef = -(-tau as f64).powi(k as i32 + 1) / fact;
        series += &power * cplx(coef, 0.0);
        power = &power * &dc;
    }
    println!(
        "block vs series at N=12: rel diff {:.3e}",
        (via_block.clone() - &series).norm() / series.norm()
    );

    // iar_chebyshev on dep0 at a few budgets.
    let dep0 = nep_gallery("dep0", &GalleryParams::new()).unwrap();
    let spmf = dep0.to_spmf();
    for maxit in [8usize, 12, 16, 20, 24, 28] {
        let mut opts = SolveOptions::default();
        opts.tol = 1e-10;
        opts.maxit = Some(maxit);
        let res = iar_chebyshev(&spmf, &opts);
        match res {
            Ok(out) => println!("cheb maxit={maxit}: {} converged", out.eigenpairs.len()),
            Err(e) => println!("cheb maxit={maxit}: best {e}"),
        }
        let res = iar(&spmf, &opts);
        match res {
            Ok(out) => println!("  iar maxit={maxit}: {} converged", out.eigenpairs.len()),
            Err(e) => println!("  iar maxit={maxit}: best {e}"),
        }
    }
}
