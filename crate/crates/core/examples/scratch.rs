use adabfgs_core::data::parse_libsvm;
use adabfgs_core::diagnostics::*;
use adabfgs_core::objective::*;
use adabfgs_core::solver::*;
use std::time::Instant;

fn main() {
    let ds = parse_libsvm(std::io::BufReader::new(std::fs::File::open("/root/crate/data/mushrooms").unwrap())).unwrap();
    let t0 = Instant::now();
    let obj = LogisticObjective::new(ds).unwrap();
    let c = obj.constants();
    println!("{:?} kappa {:e} stats {:?} ({:?})", c, c.kappa(), obj.stats(), t0.elapsed());
    let t0 = Instant::now();
    let (xs, fs) = solve_reference(&obj).unwrap();
    println!("f* = {fs:.17} ({:?}) |g|={:e}", t0.elapsed(), obj.gradient(&xs).unwrap().norm());
    let n = obj.dim();
    let hstar = obj.full_hessian(&xs).unwrap().unwrap();
    for method in [Method::ABfgs, Method::Sa2Bfgs, Method::LsBfgs] {
        for b0 in [c.l, c.mu] {
            for i in 0..4 {
                let mut cfg = RunConfig::new(method, Vector::from_element(n, 1.0), InitialEstimate::ScaledIdentity(b0));
                cfg.m = c.m / 10f64.powi(i);
                cfg.l = Some(c.l);
                cfg.f_star = Some(fs);
                cfg.record_star_metrics = i == 0;
                let t0 = Instant::now();
                let r = run(&obj, &cfg).unwrap();
                let ctx = CheckContext { method, constants: c, m: cfg.m, l: c.l, f_star: Some(fs), line_search: cfg.line_search };
                let mut v = check_trace(&r.records, &ctx);
                v.extend(check_potential_recurrence(&r.records, &ctx));
                let delta = r.records[0].gap.unwrap();
                v.extend(classify_phases(&r.records, &ctx, delta).verdicts);
                let psi0 = r.records[0].psi_bar.unwrap();
                let pt = adabfgs_core::estimator::HessianEstimate::scaled_identity(n, b0).unwrap().potential_star(&hstar).ok();
                let rc = rate_constants(&ctx, delta, psi0, pt);
                v.extend(check_envelopes(&r.records, &rc, &ctx));
                if i == 0 { v.extend(star_metrics(&r, &hstar, &c).unwrap().verdicts); }
                let t = tally(&v);
                let bad: Vec<_> = t.iter().filter(|(_, x)| x.violated > 0).map(|(k, x)| (k.as_str(), x.violated, x.first_violation, x.worst_excess)).collect();
                println!("{method} b0={b0:.3e} M/10^{i}: {} iters={} to1e-9={:?} evals={:?} {:?} viol={:?}", r.termination, r.iterations_used, r.iterations_to_gap(1e-9), r.evals, t0.elapsed(), bad);
                if i==0 { println!("   rc K1={:e} K4={:e} psi0={} pt={:?} D1={:?}", rc.k1, rc.k4, psi0, pt, rc.d1); }
                if method == Method::LsBfgs { break; }
            }
        }
    }
}
