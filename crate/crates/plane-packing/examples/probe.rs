use plane_packing::geometry::{make_disc, make_regular_ngon, Vec2};
use plane_packing::optimizer::{search_and_refine, SearchSettings};
use plane_packing::symmetry::GroupName;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(|s| s.as_str()).unwrap_or("disc-p3");
    let (shape, group, target) = match which {
        "disc-p3" => (
            make_disc(1.0, Vec2::zeros()).unwrap(),
            GroupName::p3,
            0.90689,
        ),
        "disc-p2" => (
            make_disc(1.0, Vec2::zeros()).unwrap(),
            GroupName::p2,
            0.90689,
        ),
        "pent-p2" => (
            make_regular_ngon(5, 1.0, Vec2::zeros(), 0.0).unwrap(),
            GroupName::p2,
            0.92131,
        ),
        "square-p1" => (
            make_regular_ngon(4, 1.0, Vec2::zeros(), 0.0).unwrap(),
            GroupName::p1,
            0.99999,
        ),
        "hex-p2" => (
            make_regular_ngon(6, 1.0, Vec2::zeros(), 0.0).unwrap(),
            GroupName::p2,
            0.99999,
        ),
        other => panic!("unknown case {other}"),
    };
    for seed in [1u64, 2, 3] {
        let settings = SearchSettings::fast(seed);
        let t0 = std::time::Instant::now();
        match search_and_refine(&shape, group, &settings) {
            Ok(r) => println!(
                "{which} seed {seed}: density {:.6} (target {target}, err {:+.5}) iters {} time {:?}",
                r.report.density,
                r.report.density - target,
                r.iterations_used,
                t0.elapsed()
            ),
            Err(e) => println!("{which} seed {seed}: FAILED {e}"),
        }
    }
}
