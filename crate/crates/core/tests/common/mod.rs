#![allow(dead_code)]

use hjnet::graph::{BaseGraph, EdgeSpec, GraphSpec};
use hjnet::Network;
use rand::Rng;

pub const HONEYCOMB: &str = r#"{"vertices":["x1","x2"],"edges":[
    {"id":"e0","from":"x1","to":"x2"},{"id":"e1","from":"x1","to":"x2"},{"id":"e2","from":"x1","to":"x2"}]}"#;
pub const BOUQUET: &str = r#"{"vertices":["v"],"edges":[{"id":"f1","from":"v","to":"v"},{"id":"f2","from":"v","to":"v"}]}"#;
pub const TRIANGLE_LOOP: &str = r#"{"vertices":["a","b","c"],"edges":[
    {"id":"ab","from":"a","to":"b"},{"id":"bc","from":"b","to":"c"},{"id":"ca","from":"c","to":"a"},{"id":"l","from":"b","to":"b"}]}"#;

pub const FREE: &str = r#"[{"edge":"*","family":"quadratic"}]"#;

pub fn free_bouquet() -> Network {
    Network::from_json(BOUQUET, FREE).unwrap()
}

pub fn free_honeycomb() -> Network {
    Network::from_json(HONEYCOMB, FREE).unwrap()
}

/// `ρ²/2 - cos(2πs)` on `e0`, free elsewhere.
pub fn cosine_honeycomb() -> Network {
    Network::from_json(
        HONEYCOMB,
        r#"[{"edge":"e0","family":"quadratic","potential":{"cos":[-1]}},{"edge":"*","family":"quadratic"}]"#,
    )
    .unwrap()
}

pub fn triangle_loop() -> Network {
    Network::from_json(
        TRIANGLE_LOOP,
        r#"[{"edge":"bc","family":"quadratic","potential":{"cos":[-0.5]}},
            {"edge":"l","family":"quadratic","potential":{"cos":[-1]}},
            {"edge":"*","family":"quadratic"}]"#,
    )
    .unwrap()
}

/// Triangle with a loop whose spoke `ab` is very stiff, so that reaching the
/// critical loop from `a` is cheap.
pub fn stiff_spoke_triangle() -> Network {
    Network::from_json(
        TRIANGLE_LOOP,
        r#"[{"edge":"ab","family":"quadratic","kappa":100},
            {"edge":"bc","family":"quadratic","potential":{"cos":[-0.5]}},
            {"edge":"l","family":"quadratic","potential":{"cos":[-1]}},
            {"edge":"*","family":"quadratic"}]"#,
    )
    .unwrap()
}

/// Honeycomb with a drift edge and a tabulated edge.
pub fn mixed_honeycomb() -> Network {
    Network::from_json(
        HONEYCOMB,
        r#"[{"edge":"e0","family":"quadratic","kappa":2,"drift":{"sin":[0.3]},"potential":{"cos":[0.4],"const":0.1}},
            {"edge":"e1","family":"tabulated","s_grid":[0,0.5,1],"rho_grid":[-2,-1,0,1,2],
             "values":[[2,0.5,0,0.5,2],[1.8,0.3,-0.2,0.3,1.8],[2,0.5,0,0.5,2]]},
            {"edge":"e2","family":"quadratic"}]"#,
    )
    .unwrap()
}

pub fn all_models() -> Vec<(&'static str, Network)> {
    vec![
        ("free bouquet", free_bouquet()),
        ("free honeycomb", free_honeycomb()),
        ("cosine honeycomb", cosine_honeycomb()),
        ("triangle with loop", triangle_loop()),
        ("mixed honeycomb", mixed_honeycomb()),
    ]
}

/// Connected multigraph on up to `max_v` vertices, loops allowed.
pub fn random_graph<R: Rng>(rng: &mut R, max_v: usize, extra: usize) -> BaseGraph {
    let n = rng.gen_range(1..=max_v);
    let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (a, b) = if rng.gen_bool(0.5) { (i, j) } else { (j, i) };
        edges.push((a, b));
    }
    for _ in 0..rng.gen_range(1..=extra) {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    let spec = GraphSpec {
        vertices: vertices.clone(),
        edges: edges
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| EdgeSpec {
                id: format!("e{k}"),
                from: vertices[a].clone(),
                to: vertices[b].clone(),
            })
            .collect(),
    };
    BaseGraph::build(&spec).unwrap()
}
