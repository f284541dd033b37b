//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use tower::ServiceExt;

use oracle::{binary_enumeration_oracle, random_lp, random_milp, vertex_oracle, OracleResult};
use planopt_core::assessment::{compute_emissions, compute_indicators};
use planopt_core::io::{embedded_samples, front_to_string, parse_instance};
use planopt_core::lp::{solve, LinearProgram, Relation, SolveStatus};
use planopt_core::model::{solve_scenario, ObjectiveSpec, PlanInstance, QuantityKey, Scenario, UserConstraint};
use planopt_core::pareto::{compute_anchors, dominates, nnc_front, ParetoFront, ParetoRequest};
use planopt_service::{router, AppState, Config};

const OBJECTIVE_TOL: f64 = 1e-6;
const COMPLEMENTARITY_TOL: f64 = 1e-6;
const SPLIT_TOL: f64 = 1e-6;
const EMISSION_TOL: f64 = 0.01;
const FEASIBILITY_TOL: f64 = 1e-6;
const NNC_TOL: f64 = 1e-6;
const LP_COUNT: usize = 200;
const MILP_COUNT: usize = 50;
const SPLIT_COUNT: usize = 100;
const LP_BUDGET: Duration = Duration::from_secs(10);
const NNC_BUDGET: Duration = Duration::from_secs(1);

type Check = Result<String, String>;

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn sample(name: &str) -> PlanInstance {
    let (_, text) = embedded_samples().into_iter().find(|(n, _)| *n == name).unwrap();
    parse_instance(text, None, None, name).unwrap()
}

fn key(s: &str) -> QuantityKey {
    s.parse().unwrap()
}

fn min(s: &str) -> ObjectiveSpec {
    ObjectiveSpec::minimize(format!("min {s}"), key(s))
}

fn max(s: &str) -> ObjectiveSpec {
    ObjectiveSpec::maximize(format!("max {s}"), key(s))
}

/// Every scenario produced along the way, with the instance it belongs to.
#[derive(Default)]
struct Corpus {
    scenarios: Vec<(PlanInstance, Scenario)>,
}

impl Corpus {
    fn add(&mut self, instance: &PlanInstance, scenarios: impl IntoIterator<Item = Scenario>) {
        self.scenarios.extend(scenarios.into_iter().map(|s| (instance.clone(), s)));
    }
}

fn agrees(lp: &LinearProgram, expected: OracleResult) -> Result<(), String> {
    let sol = solve(lp).map_err(|e| e.to_string())?;
    match expected {
        OracleResult::Infeasible if sol.status == SolveStatus::Infeasible => Ok(()),
        OracleResult::Optimal(obj) if sol.status == SolveStatus::Optimal => {
            let got = sol.objective_value.unwrap_or(f64::NAN);
            ensure((got - obj).abs() <= OBJECTIVE_TOL, || format!("objective {got} vs oracle {obj}\n{lp}"))?;
            let problems = lp.check_point(&sol.values);
            ensure(problems.is_empty(), || format!("{problems:?}\n{lp}"))
        }
        other => Err(format!("status {:?} vs oracle {other:?}\n{lp}", sol.status)),
    }
}

fn lp_oracle() -> Check {
    let mut rng = StdRng::seed_from_u64(0xacce_0001);
    let start = Instant::now();
    for _ in 0..LP_COUNT {
        let lp = random_lp(&mut rng);
        agrees(&lp, vertex_oracle(&lp))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < LP_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{LP_COUNT} programs in {:.2} s", elapsed.as_secs_f64()))
}

fn milp_enumeration() -> Check {
    let mut rng = StdRng::seed_from_u64(0xacce_0002);
    for _ in 0..MILP_COUNT {
        let lp = random_milp(&mut rng);
        agrees(&lp, binary_enumeration_oracle(&lp))?;
    }
    Ok(format!("{MILP_COUNT} programs"))
}

/// Three primaries that may grow or shrink and two secondaries depending on
/// both directions.
fn split_instance() -> PlanInstance {
    let doc = json!({
        "schema_version": 1,
        "activities": [
            {"id": "p1", "name": "p1", "kind": "primary", "lower": -50, "upper": 80, "unit_cost": 1.5, "unit_outcome": 1},
            {"id": "p2", "name": "p2", "kind": "primary", "lower": -30, "upper": 40, "unit_cost": 0.5, "unit_outcome": 2},
            {"id": "p3", "name": "p3", "kind": "primary", "lower": -10, "upper": 60, "unit_cost": 0, "unit_outcome": 0.5},
            {"id": "s1", "name": "s1", "kind": "secondary", "lower": 0, "upper": 1000, "unit_cost": 0.2, "unit_outcome": 0},
            {"id": "s2", "name": "s2", "kind": "secondary", "lower": 0, "upper": 1000, "unit_cost": 0.1, "unit_outcome": 0}
        ],
        "budget": 1e6,
        "min_outcome": -1e6,
        "dep_plus": [[0.5, 0], [0.25, 1], [0, 0.75]],
        "dep_minus": [[0, 2], [1.5, 0], [0.5, 0.5]],
        "mop": [[], [], [], [], []],
        "mpr": [],
        "pressure_names": [],
        "receptor_names": [],
        "boilers": [],
        "moc": [[], [], [], [], []],
        "mec": [],
        "emission_names": [],
        "indicator_tables": [],
        "hours_per_year": 7500,
        "efficiency": 0.39
    });
    parse_instance(&doc.to_string(), None, None, "split").unwrap()
}

fn dependency_split(corpus: &mut Corpus) -> Check {
    let inst = split_instance();
    let primaries: Vec<usize> = inst.primaries().map(|(i, _)| i).collect();
    let secondaries: Vec<usize> = inst.secondaries().map(|(i, _)| i).collect();
    let mut rng = StdRng::seed_from_u64(0xacce_0004);
    for _ in 0..SPLIT_COUNT {
        let fixed: Vec<f64> = primaries
            .iter()
            .map(|&i| {
                let a = &inst.activities[i];
                if rng.gen_bool(0.15) {
                    0.0
                } else {
                    rng.gen_range(a.lower..=a.upper)
                }
            })
            .collect();
        let extra: Vec<UserConstraint> = primaries
            .iter()
            .zip(&fixed)
            .map(|(&i, &v)| {
                let k = key(&format!("activity:{}", inst.activities[i].id));
                UserConstraint::new([(k, 1.0)], Relation::Eq, v)
            })
            .collect();
        let s = solve_scenario(&inst, &min("total_cost"), &extra).map_err(|e| format!("{fixed:?}: {e}"))?;
        for (k, &j) in secondaries.iter().enumerate() {
            let expected: f64 = fixed
                .iter()
                .enumerate()
                .map(|(r, &m)| inst.dep_plus.get(r, k) * m.max(0.0) + inst.dep_minus.get(r, k) * (-m).max(0.0))
                .sum();
            let got = s.magnitudes[&inst.activities[j].id];
            ensure((got - expected).abs() <= SPLIT_TOL, || {
                format!("{fixed:?}: {} = {got}, expected {expected}", inst.activities[j].id)
            })?;
        }
        corpus.add(&inst, [s]);
    }
    Ok(format!("{SPLIT_COUNT} primary vectors"))
}

fn boiler_instance() -> PlanInstance {
    let mut doc: Value = serde_json::from_str(embedded_samples()[1].1).unwrap();
    doc["boilers"] = json!([{"id": "b", "name": "b"}]);
    doc["moc"] = json!([[1], [0]]);
    doc["mec"] = json!([[2], [0]]);
    doc["emission_names"] = json!(["E", "NOx"]);
    doc["indicator_tables"] = json!([
        {"name": "human_toxicity", "unit": "kg Pb-eq", "factors": {"NOx": {"members": [95, 300]}}}
    ]);
    doc["hours_per_year"] = json!(1000);
    doc["efficiency"] = json!(0.39);
    parse_instance(&doc.to_string(), None, None, "boiler").unwrap()
}

fn emissions_hand_case() -> Check {
    let inst = boiler_instance();
    let grams = compute_emissions(&inst, &[1.0]).map_err(|e| e.to_string())?[0];
    ensure((grams - 18461.54).abs() <= EMISSION_TOL, || format!("{grams} g"))?;
    Ok(format!("{grams:.4} g"))
}

fn indicator_fixture(corpus: &Corpus) -> Check {
    let inst = boiler_instance();
    let v = compute_indicators(&inst, &[0.0, 1000.0]).map_err(|e| e.to_string())?[0];
    ensure(v.worst == 300.0 && v.best == 95.0 && v.average == 197.5, || format!("{v:?}"))?;
    let mut checked = 0;
    for table in sample("sample-region").indicator_tables {
        for (name, f) in &table.factors {
            ensure(f.is_ordered(), || format!("factor {}/{name}: {f:?}", table.name))?;
        }
    }
    for (_, s) in &corpus.scenarios {
        for (name, v) in &s.indicators {
            ensure(v.is_ordered(), || format!("{name}: {v:?}"))?;
            checked += 1;
        }
    }
    ensure(checked > 0, || "no indicator values in the corpus".into())?;
    Ok(format!("{checked} corpus indicator values ordered"))
}

fn request(objectives: Vec<ObjectiveSpec>, points: usize) -> ParetoRequest {
    ParetoRequest {
        objectives,
        points,
        extra: vec![],
    }
}

fn nnc_toy(corpus: &mut Corpus) -> Check {
    let inst = sample("toy-segment");
    let req = request(vec![min("activity:x"), min("activity:y")], 5);
    let start = Instant::now();
    let front = nnc_front(&inst, &req).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < NNC_BUDGET, || format!("took {elapsed:?}"))?;
    ensure(front.scenarios.len() == 5, || format!("{} scenarios", front.scenarios.len()))?;
    let span = front.nadir_estimate[0] - front.utopia[0];
    let normalized: Vec<f64> = front
        .scenarios
        .iter()
        .map(|s| (s.objective_values["min activity:x"] - front.utopia[0]) / span)
        .collect();
    for (v, expected) in normalized.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]) {
        ensure((v - expected).abs() <= NNC_TOL, || format!("{normalized:?}"))?;
    }
    for s in &front.scenarios {
        let sum = s.magnitudes["x"] + s.magnitudes["y"];
        ensure((sum - 1.0).abs() <= NNC_TOL, || format!("x + y = {sum}"))?;
    }
    corpus.add(&inst, front.scenarios);
    Ok(format!("{normalized:?} in {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn canonical(front: &ParetoFront, s: &Scenario) -> Vec<f64> {
    front
        .objectives
        .iter()
        .map(|o| o.canonical(s.objective_values[&o.label]))
        .collect()
}

fn check_front(inst: &PlanInstance, req: &ParetoRequest, front: &ParetoFront) -> Result<(), String> {
    let values: Vec<Vec<f64>> = front.scenarios.iter().map(|s| canonical(front, s)).collect();
    let active: Vec<usize> = (0..front.objectives.len())
        .filter(|&j| !front.constant_objectives.contains(&front.objectives[j].label))
        .collect();
    let restricted = |v: &Vec<f64>| active.iter().map(|&j| v[j]).collect::<Vec<_>>();
    for (i, a) in values.iter().enumerate() {
        for (j, b) in values.iter().enumerate() {
            ensure(i == j || !dominates(&restricted(a), &restricted(b)), || format!("{a:?} dominates {b:?}"))?;
        }
    }
    let anchors = compute_anchors(inst, req).map_err(|e| e.to_string())?;
    for (j, o) in req.objectives.iter().enumerate() {
        let best = o.canonical(anchors[j].objective_values[&o.label]);
        let front_best = values.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min);
        ensure((front_best - best).abs() <= OBJECTIVE_TOL * (1.0 + best.abs()), || {
            format!("anchor {}: {front_best} vs {best}", o.label)
        })?;
    }
    if active.len() == 2 {
        for w in values.windows(2) {
            let t = OBJECTIVE_TOL * (1.0 + w[0][active[1]].abs());
            ensure(w[0][active[0]] <= w[1][active[0]] && w[1][active[1]] <= w[0][active[1]] + t, || {
                format!("not monotone: {:?} then {:?}", w[0], w[1])
            })?;
        }
    }
    let again = nnc_front(inst, req).map_err(|e| e.to_string())?;
    ensure(front_to_string(front) == front_to_string(&again), || "repeated run differs".into())
}

fn front_properties(corpus: &mut Corpus) -> Check {
    let toy = sample("toy-segment");
    let region = sample("sample-region");
    let mut constrained = request(vec![min("total_cost"), min("emission:CO2")], 5);
    constrained
        .extra
        .push(UserConstraint::new([(key("activity:coal"), 1.0)], Relation::Le, -200.0));
    let fixtures = vec![
        (&toy, request(vec![min("activity:x"), min("activity:y")], 5)),
        (&toy, request(vec![min("activity:x"), max("activity:x")], 11)),
        (&region, request(vec![min("total_cost"), min("receptor:air_quality")], 6)),
        (&region, request(vec![min("total_cost"), min("indicator:human_toxicity")], 5)),
        (&region, request(vec![max("total_outcome"), min("emission:CO2")], 7)),
        (&region, request(vec![min("emission:NOx"), min("activity:solar")], 4)),
        (&region, request(vec![min("total_cost"), min("indicator:global_warming"), min("receptor:soil_quality")], 10)),
        (&region, constrained),
    ];
    let mut total = 0;
    for (inst, req) in &fixtures {
        let labels: Vec<&str> = req.objectives.iter().map(|o| o.label.as_str()).collect();
        let front = nnc_front(inst, req).map_err(|e| format!("{labels:?}: {e}"))?;
        ensure(!front.scenarios.is_empty(), || format!("{labels:?}: empty front"))?;
        check_front(inst, req, &front).map_err(|e| format!("{labels:?}: {e}"))?;
        for s in &front.scenarios {
            for c in &req.extra {
                ensure(s.satisfies(c, FEASIBILITY_TOL), || format!("{labels:?}: violates {c}"))?;
            }
        }
        total += front.scenarios.len();
        corpus.add(inst, front.scenarios);
    }
    Ok(format!("{} fixtures, {total} scenarios", fixtures.len()))
}

fn complementarity(corpus: &Corpus) -> Check {
    let mut worst: f64 = 0.0;
    for (inst, s) in &corpus.scenarios {
        for a in &inst.activities {
            let m = s.magnitudes[&a.id];
            let p = s.positive_parts[&a.id];
            let product = p * (p - m);
            worst = worst.max(product);
            ensure(product <= COMPLEMENTARITY_TOL, || format!("{}: P = {p}, N = {}", a.id, p - m))?;
        }
    }
    Ok(format!("{} scenarios, max P*N = {worst:e}", corpus.scenarios.len()))
}

fn feasibility(corpus: &Corpus) -> Check {
    for (inst, s) in &corpus.scenarios {
        let budget_tol = FEASIBILITY_TOL * (1.0 + inst.budget.abs());
        let outcome_tol = FEASIBILITY_TOL * (1.0 + inst.min_outcome.abs());
        ensure(s.total_cost <= inst.budget + budget_tol, || format!("cost {} > {}", s.total_cost, inst.budget))?;
        ensure(s.total_outcome >= inst.min_outcome - outcome_tol, || {
            format!("outcome {} < {}", s.total_outcome, inst.min_outcome)
        })?;
    }
    Ok(format!("{} scenarios", corpus.scenarios.len()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8_lossy(&bytes).into_owned())
}

fn objective(label: &str, key: &str, sense: &str) -> Value {
    json!({"terms": {key: 1.0}, "sense": sense, "label": label})
}

fn toy_pareto(points: usize, objectives: usize) -> Value {
    let all = [objective("min activity:x", "activity:x", "minimize"), objective("min activity:y", "activity:y", "minimize")];
    json!({"sample": "toy-segment", "objectives": all[..objectives], "points": points})
}

fn cli(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_planopt"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))?;
    String::from_utf8(o.stdout).map_err(|e| e.to_string())
}

async fn service_conformance() -> Check {
    // No UI directory is configured anywhere below.
    let app = router(AppState::new(&Config::default()).map_err(|e| e.to_string())?);
    let slow = router(
        AppState::new(&Config {
            timeout: Duration::ZERO,
            ..Config::default()
        })
        .map_err(|e| e.to_string())?,
    );
    let solve_toy = json!({"sample": "toy-segment", "objective": objective("min activity:x", "activity:x", "minimize")});
    let mut no_budget: Value = serde_json::from_str(embedded_samples()[1].1).unwrap();
    no_budget.as_object_mut().unwrap().remove("budget");
    let mut contradictory = solve_toy.clone();
    contradictory["constraints"] = json!([
        {"terms": {"activity:x": 1.0}, "relation": ">=", "rhs": 0.8},
        {"terms": {"activity:y": 1.0}, "relation": ">=", "rhs": 0.8}
    ]);
    let mut unknown = solve_toy.clone();
    unknown["sample"] = json!("atlantis");
    let mut bad_quantity = solve_toy.clone();
    bad_quantity["objective"] = objective("o", "receptor:ocean", "minimize");

    let post = |uri: &'static str, body: Value| ("POST", uri, Some(body.to_string()));
    let cases: Vec<(&str, &Router, (&str, &str, Option<String>), StatusCode)> = vec![
        ("health", &app, ("GET", "/api/v1/health", None), StatusCode::OK),
        ("samples", &app, ("GET", "/api/v1/samples", None), StatusCode::OK),
        ("sample by name", &app, ("GET", "/api/v1/samples/toy-segment", None), StatusCode::OK),
        ("solve", &app, post("/api/v1/solve", solve_toy.clone()), StatusCode::OK),
        (
            "solve without budget",
            &app,
            post("/api/v1/solve", json!({"instance": no_budget, "objective": solve_toy["objective"]})),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        ("solve unknown quantity", &app, post("/api/v1/solve", bad_quantity), StatusCode::UNPROCESSABLE_ENTITY),
        ("solve contradictory", &app, post("/api/v1/solve", contradictory), StatusCode::CONFLICT),
        ("solve unknown sample", &app, post("/api/v1/solve", unknown), StatusCode::NOT_FOUND),
        ("pareto", &app, post("/api/v1/pareto", toy_pareto(5, 2)), StatusCode::OK),
        ("pareto points=1", &app, post("/api/v1/pareto", toy_pareto(1, 2)), StatusCode::UNPROCESSABLE_ENTITY),
        ("pareto one objective", &app, post("/api/v1/pareto", toy_pareto(5, 1)), StatusCode::UNPROCESSABLE_ENTITY),
        ("pareto over time limit", &slow, post("/api/v1/pareto", toy_pareto(5, 2)), StatusCode::REQUEST_TIMEOUT),
    ];
    let mut bodies = Vec::new();
    for (name, router, (method, uri, body), expected) in &cases {
        let (status, text) = call(router, method, uri, body.clone()).await;
        ensure(status == *expected, || format!("{name}: {status}, expected {expected}: {text}"))?;
        bodies.push(text);
    }

    let toy = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/samples/toy-segment.json");
    let solved = cli(&["solve", toy, "--objective", "min activity:x"])?;
    ensure(solved == bodies[3], || "solve: CLI and service documents differ".into())?;
    let front = cli(&["pareto", toy, "--objectives", "min activity:x; min activity:y", "--points", "5"])?;
    ensure(front == bodies[8], || "pareto: CLI and service documents differ".into())?;
    Ok(format!("{} cases, 2 byte-identical CLI comparisons", cases.len()))
}

fn main() -> ExitCode {
    let mut corpus = Corpus::default();
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let lp = lp_oracle();
    let milp = milp_enumeration();
    let split = dependency_split(&mut corpus);
    let nnc = nnc_toy(&mut corpus);
    let fronts = front_properties(&mut corpus);
    let service = runtime.block_on(service_conformance());
    let results = [
        ("lp oracle", lp),
        ("milp enumeration", milp),
        ("complementarity", complementarity(&corpus)),
        ("dependency split", split),
        ("emissions hand case", emissions_hand_case()),
        ("indicator fixture", indicator_fixture(&corpus)),
        ("nnc toy segment", nnc),
        ("front properties", fronts),
        ("budget and outcome feasibility", feasibility(&corpus)),
        ("service conformance", service),
    ];
    let mut failed = 0;
    for (name, result) in &results {
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
