//! Configuration obstacles and guiding circles.
//!
//! Builds the Minkowski sum of a neighbor footprint and the negated ego
//! footprint, then asks whether a few ego positions are blocked.

use navplan::geom::{circle_through, minkowski_sum, ArcOrLine, ConvexPolygon, Vec2};

fn main() {
    let ego = ConvexPolygon::rectangle(4.5, 1.8).unwrap();
    let truck = ConvexPolygon::rectangle(8.0, 2.5).unwrap().transformed(Vec2::new(20.0, 0.0), 0.3);

    let obstacle = minkowski_sum(&truck, &ego.negated()).unwrap();
    println!("obstacle has {} vertices, area {:.1} m^2", obstacle.len(), obstacle.area());
    for x in [10.0, 14.0, 18.0, 26.0, 30.0] {
        let p = Vec2::new(x, 1.0);
        let direct = ego.transformed(p, 0.0).intersects(&truck);
        println!(
            "ego at ({x:>4.1}, 1.0): inside sum = {:<5}  footprints overlap = {:<5}  clearance {:.2} m",
            obstacle.contains(p),
            direct,
            obstacle.distance_to(p)
        );
    }

    let (a, b, c) = (Vec2::new(0.0, 0.0), Vec2::new(20.0, 3.0), Vec2::new(38.0, 12.0));
    match circle_through(a, b, c).unwrap() {
        ArcOrLine::Arc { center, radius, direction, .. } => {
            println!("arc radius {radius:.2} m turning {direction:?}");
            for p in [a, b, c] {
                println!("  |p - center| = {:.12}", p.distance(center));
            }
        }
        ArcOrLine::Line { .. } => println!("points are collinear"),
    }
}
