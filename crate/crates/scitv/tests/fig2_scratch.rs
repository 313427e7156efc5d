// scratch: tune the convergence-shape lambda grids (deleted before final)
use scitv::sim::{generate_masks, generate_synthetic_scene, simulate_measurement, SceneKind};
use scitv::solve::{solve_fista, solve_gap, solve_twist, Framework, SolveConfig};
use scitv::sensing::SensingOperator;

#[test]
#[ignore]
fn fig2_numbers() {
    let truth = generate_synthetic_scene(64, 64, 8, 0, SceneKind::MovingGaussian).unwrap();
    let masks = generate_masks(64, 64, 8, 1, 0.5).unwrap();
    let y = simulate_measurement(&truth, &masks, 0.0, 0).unwrap();
    let op = SensingOperator::new(masks).unwrap();
    let tv = "atv-fgp".parse().unwrap();

    let mut base = SolveConfig::new(Framework::Gap, tv);
    base.reference = Some(truth.clone());
    base.in_iter = 2;

    println!("== GAP 100 iters ==");
    for lam in [0.005, 0.01, 0.02, 0.05, 0.1] {
        let mut cfg = base.clone();
        cfg.lambda = lam; cfg.max_iter = 100;
        let (_, tr) = solve_gap(&y, &op, &cfg).unwrap();
        println!("lam={lam}: psnr@60={:.3} psnr@100={:.3}", tr.psnr_at(60).unwrap(), tr.psnr_at(100).unwrap());
    }
    println!("== FISTA 100 iters ==");
    for lam in [0.02, 0.05, 0.1, 0.2, 0.5, 1.0] {
        let mut cfg = base.clone();
        cfg.framework = Framework::Fista;
        cfg.lambda = lam; cfg.max_iter = 100;
        let (_, tr) = solve_fista(&y, &op, &cfg).unwrap();
        println!("lam={lam}: psnr@60={:.3} psnr@100={:.3}", tr.psnr_at(60).unwrap(), tr.psnr_at(100).unwrap());
    }
    println!("== TwIST 500 iters ==");
    for lam in [0.005, 0.01, 0.02, 0.05, 0.1] {
        let mut cfg = base.clone();
        cfg.framework = Framework::Twist;
        cfg.lambda = lam; cfg.max_iter = 500;
        let (_, tr) = solve_twist(&y, &op, &cfg).unwrap();
        println!("lam={lam}: psnr@60={:.3} psnr@500={:.3}", tr.psnr_at(60).unwrap(), tr.psnr_at(500).unwrap());
    }
}
