//! Random generators and brute-force oracles shared by the property tests
//! and the acceptance target. Every check takes a seed and returns a
//! description of the first disagreement it finds.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use voxagent_core::actlang::path::{find_path, Goal, PathLimits};
use voxagent_core::actlang::{
    check, execute, parse, pretty, BinOp, Call, ExecLimits, ExecStatus, Expr, FnDef, Program, Span, Stmt, StmtKind,
    UnOp, MAX_REPEAT,
};
use voxagent_core::perception::{raycast, render, shade, Camera, Face, Hit};
use voxagent_core::skills::{SkillLibrary, EMBED_DIM};
use voxagent_core::verify::{canonicalize, ignite, verify_structure, Template};
use voxagent_core::world::{
    apply_diff, break_block, craft, generate_world, place_block, smelt, tables, world_diff, AgentState, BlockId,
    VoxelWorld, WorldKind, REACH,
};
use voxagent_core::{Pos, Vec3};

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Random well-formed programs

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    Str,
    Pos,
}

struct Var {
    name: String,
    ty: Ty,
    assignable: bool,
}

struct ProgGen<'a> {
    rng: &'a mut ChaCha8Rng,
    /// Callable user functions: name and arity.
    fns: Vec<(String, usize)>,
    scope: Vec<Vec<Var>>,
    fresh: usize,
    /// Statements still allowed, so programs stay small.
    budget: i32,
}

const WORDS: &[&str] = &[
    "oak_log",
    "dirt",
    "stone",
    "cobblestone",
    "stick",
    "hello world",
    "",
    "a\"b",
    "back\\slash",
    "tab\there",
    "new\nline",
];

fn sp() -> Span {
    Span::default()
}

fn call(name: &str, args: Vec<Expr>) -> Expr {
    Expr::Call(Call {
        name: name.into(),
        args,
        span: sp(),
    })
}

fn stmt(kind: StmtKind) -> Stmt {
    Stmt { kind, span: sp() }
}

impl ProgGen<'_> {
    fn vars(&self, ty: Ty, assignable: bool) -> Vec<String> {
        self.scope
            .iter()
            .flatten()
            .filter(|v| v.ty == ty && (v.assignable || !assignable))
            .map(|v| v.name.clone())
            .collect()
    }

    fn var_of(&mut self, ty: Ty) -> Option<Expr> {
        let vs = self.vars(ty, false);
        vs.choose(self.rng).map(|n| Expr::Var(n.clone(), sp()))
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn expr(&mut self, ty: Ty, depth: u32) -> Expr {
        let leaf = depth == 0 || self.rng.gen_bool(0.35);
        if leaf {
            if self.rng.gen_bool(0.5) {
                if let Some(v) = self.var_of(ty) {
                    return v;
                }
            }
            return match ty {
                Ty::Int => Expr::Int(self.rng.gen_range(-40..=40)),
                Ty::Bool => Expr::Bool(self.rng.gen()),
                Ty::Str => Expr::Str(WORDS.choose(self.rng).unwrap().to_string()),
                Ty::Pos => {
                    let name = if self.rng.gen() { "rel" } else { "pos" };
                    let args = (0..3).map(|_| Expr::Int(self.rng.gen_range(-3..=3))).collect();
                    call(name, args)
                }
            };
        }
        let d = depth - 1;
        match ty {
            Ty::Int => match self.rng.gen_range(0..5) {
                0 => {
                    let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul].choose(self.rng).unwrap();
                    Expr::Binary(op, Box::new(self.expr(Ty::Int, d)), Box::new(self.expr(Ty::Int, d)))
                }
                1 => {
                    // a negated literal would print as a negative literal
                    let inner = match self.expr(Ty::Int, d) {
                        Expr::Int(n) => Expr::Binary(BinOp::Add, Box::new(Expr::Int(n)), Box::new(Expr::Int(1))),
                        e => e,
                    };
                    Expr::Unary(UnOp::Neg, Box::new(inner))
                }
                2 => call("count", vec![self.expr(Ty::Str, d)]),
                _ => Expr::Binary(
                    BinOp::Add,
                    Box::new(self.expr(Ty::Int, d)),
                    Box::new(self.expr(Ty::Int, d)),
                ),
            },
            Ty::Bool => match self.rng.gen_range(0..6) {
                0 => {
                    let op = *[BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne]
                        .choose(self.rng)
                        .unwrap();
                    Expr::Binary(op, Box::new(self.expr(Ty::Int, d)), Box::new(self.expr(Ty::Int, d)))
                }
                1 => {
                    let op = *[BinOp::And, BinOp::Or].choose(self.rng).unwrap();
                    Expr::Binary(op, Box::new(self.expr(Ty::Bool, d)), Box::new(self.expr(Ty::Bool, d)))
                }
                2 => Expr::Unary(UnOp::Not, Box::new(self.expr(Ty::Bool, d))),
                3 => call("has", vec![self.expr(Ty::Str, d), self.expr(Ty::Int, d)]),
                4 => Expr::Binary(
                    BinOp::Eq,
                    Box::new(self.expr(Ty::Str, d)),
                    Box::new(self.expr(Ty::Str, d)),
                ),
                _ => Expr::Bool(self.rng.gen()),
            },
            Ty::Str => match self.rng.gen_range(0..3) {
                0 => call("block_at", vec![self.expr(Ty::Pos, d)]),
                _ => Expr::Str(WORDS.choose(self.rng).unwrap().to_string()),
            },
            Ty::Pos => {
                let name = if self.rng.gen() { "rel" } else { "pos" };
                let args = (0..3).map(|_| self.expr(Ty::Int, d)).collect();
                call(name, args)
            }
        }
    }

    fn any_ty(&mut self) -> Ty {
        *[Ty::Int, Ty::Int, Ty::Bool, Ty::Str, Ty::Pos].choose(self.rng).unwrap()
    }

    fn block(&mut self, depth: u32) -> Vec<Stmt> {
        self.scope.push(Vec::new());
        let n = self.rng.gen_range(0..=4);
        let mut out = Vec::new();
        for _ in 0..n {
            if self.budget <= 0 {
                break;
            }
            self.budget -= 1;
            out.push(self.stmt(depth));
        }
        self.scope.pop();
        out
    }

    fn repeat_count(&mut self) -> u32 {
        match self.rng.gen_range(0..100) {
            0..=69 => self.rng.gen_range(0..=4),
            70..=94 => self.rng.gen_range(5..=20),
            _ => self.rng.gen_range(200..=MAX_REPEAT),
        }
    }

    fn stmt(&mut self, depth: u32) -> Stmt {
        let nested = depth > 0;
        loop {
            match self.rng.gen_range(0..10) {
                0 | 1 => {
                    let ty = self.any_ty();
                    let e = self.expr(ty, 2);
                    let name = self.fresh("v");
                    self.scope.last_mut().unwrap().push(Var {
                        name: name.clone(),
                        ty,
                        assignable: true,
                    });
                    return stmt(StmtKind::Let(name, e));
                }
                2 => {
                    let ty = self.any_ty();
                    let vs = self.vars(ty, true);
                    if let Some(n) = vs.choose(self.rng).cloned() {
                        let e = self.expr(ty, 2);
                        return stmt(StmtKind::Assign(n, e));
                    }
                }
                3 if nested => {
                    let count = self.repeat_count();
                    let var = self.rng.gen_bool(0.5).then(|| self.fresh("i"));
                    self.scope.push(Vec::new());
                    if let Some(v) = &var {
                        self.scope.last_mut().unwrap().push(Var {
                            name: v.clone(),
                            ty: Ty::Int,
                            assignable: false,
                        });
                    }
                    let body = self.block(depth - 1);
                    self.scope.pop();
                    return stmt(StmtKind::Repeat { count, var, body });
                }
                4 if nested => {
                    let cond = self.expr(Ty::Bool, 2);
                    let then = self.block(depth - 1);
                    let otherwise = match self.rng.gen_range(0..3) {
                        0 => None,
                        1 => Some(self.block(depth - 1)),
                        _ => {
                            self.scope.push(Vec::new());
                            let s = self.stmt(depth - 1);
                            self.scope.pop();
                            Some(vec![s])
                        }
                    };
                    return stmt(StmtKind::If { cond, then, otherwise });
                }
                5 if !self.fns.is_empty() => {
                    let (name, arity) = self.fns.choose(self.rng).cloned().unwrap();
                    let args = (0..arity).map(|_| self.expr(Ty::Int, 1)).collect();
                    return stmt(StmtKind::Expr(call(&name, args)));
                }
                6 => {
                    let e = match self.rng.gen_range(0..6) {
                        0 => call("equip", vec![self.expr(Ty::Str, 1)]),
                        1 => call("craft", vec![self.expr(Ty::Str, 1), self.expr(Ty::Int, 1)]),
                        2 => call("place", vec![self.expr(Ty::Str, 1), self.expr(Ty::Pos, 1)]),
                        3 => call("look_at", vec![self.expr(Ty::Pos, 1)]),
                        4 => call("move_to", vec![self.expr(Ty::Pos, 1)]),
                        _ => call("dig", vec![self.expr(Ty::Pos, 1)]),
                    };
                    return stmt(StmtKind::Expr(e));
                }
                7 => {
                    let e = self.expr(Ty::Str, 2);
                    return stmt(StmtKind::Expr(call("chat", vec![e])));
                }
                _ => {
                    let e = self.expr(Ty::Int, 2);
                    return stmt(StmtKind::Expr(call("chat", vec![e])));
                }
            }
        }
    }
}

/// A random program that passes the static checks: earlier functions are
/// the only callees of later ones, so the call graph is acyclic.
pub fn random_program(rng: &mut ChaCha8Rng) -> Program {
    let mut g = ProgGen {
        rng,
        fns: Vec::new(),
        scope: Vec::new(),
        fresh: 0,
        budget: 40,
    };
    let nfns = g.rng.gen_range(0..=3);
    let mut functions = Vec::new();
    for k in 0..nfns {
        let arity = g.rng.gen_range(0..=2);
        let params: Vec<String> = (0..arity).map(|i| format!("a{k}_{i}")).collect();
        g.scope.push(
            params
                .iter()
                .map(|p| Var {
                    name: p.clone(),
                    ty: Ty::Int,
                    assignable: true,
                })
                .collect(),
        );
        let body = g.block(2);
        g.scope.pop();
        let name = format!("f{k}");
        functions.push(FnDef {
            name: name.clone(),
            params,
            body,
            span: sp(),
        });
        g.fns.push((name, arity));
    }
    g.scope.push(Vec::new());
    g.budget = 40;
    let body = g.block(3);
    Program { functions, body }
}

/// Pretty-printing then parsing gives back the same tree.
pub fn check_round_trip(seed: u64) -> Check {
    let p = random_program(&mut rng(seed));
    let src = pretty(&p);
    let back = parse(&src).map_err(|e| format!("seed {seed}: printed program does not parse: {e}\n{src}"))?;
    if back.without_spans() != p {
        return Err(format!("seed {seed}: round trip changed the program\n{src}"));
    }
    Ok(())
}

pub const FUZZ_LIMITS: ExecLimits = ExecLimits {
    max_steps: 10_000,
    search_radius: 4,
    path_node_budget: 300,
};

/// A generated program passes the checks and halts within the step budget;
/// a runtime error points at a call or statement of the program.
pub fn check_termination(seed: u64, world: &VoxelWorld) -> Check {
    let p = random_program(&mut rng(seed));
    check(&p).map_err(|e| format!("seed {seed}: generated program fails the checks: {e}\n{}", pretty(&p)))?;
    // execute against the printed source so errors carry real locations
    let src = pretty(&p);
    let parsed = parse(&src).map_err(|e| format!("seed {seed}: {e}"))?;
    let mut w = world.clone();
    let mut agent = w.spawn_agent();
    let r = execute(&parsed, &mut w, &mut agent, &FUZZ_LIMITS);
    if r.steps_used > FUZZ_LIMITS.max_steps {
        return Err(format!(
            "seed {seed}: used {} steps of {}",
            r.steps_used, FUZZ_LIMITS.max_steps
        ));
    }
    if let ExecStatus::Error { span, message } = &r.status {
        let lines = src.lines().count() as u32;
        if span.line == 0 || span.line > lines || span.col == 0 {
            return Err(format!(
                "seed {seed}: error {message:?} has no usable location ({span})"
            ));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Pathfinding against breadth-first search

fn passable(b: BlockId) -> bool {
    matches!(b, BlockId::Air | BlockId::Water | BlockId::Portal)
}

fn can_stand(w: &VoxelWorld, p: Pos) -> bool {
    passable(w.block_at(p)) && passable(w.block_at(p.offset(0, 1, 0))) && !passable(w.block_at(p.offset(0, -1, 0)))
}

fn in_box(p: Pos, lo: Pos, hi: Pos) -> bool {
    (lo.x..=hi.x).contains(&p.x) && (lo.y..=hi.y).contains(&p.y) && (lo.z..=hi.z).contains(&p.z)
}

/// One move of the walker, written out from the movement rules: step to a
/// level neighbour, hop up one block when there is headroom, or drop down
/// one to three blocks through open air.
pub fn legal_step(w: &VoxelWorld, from: Pos, to: Pos) -> bool {
    let (dx, dz) = (to.x - from.x, to.z - from.z);
    if dx.abs() + dz.abs() != 1 || !can_stand(w, to) {
        return false;
    }
    let side = from.offset(dx, 0, dz);
    match to.y - from.y {
        0 => true,
        1 => !can_stand(w, side) && passable(w.block_at(from.offset(0, 2, 0))),
        d @ -3..=-1 => !can_stand(w, side) && (0..=1 - d).all(|k| passable(w.block_at(side.offset(0, 1 - k, 0)))),
        _ => false,
    }
}

fn neighbours(w: &VoxelWorld, p: Pos, lo: Pos, hi: Pos) -> Vec<Pos> {
    let mut out = Vec::new();
    for (dx, dz) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
        for dy in -3..=1 {
            let q = p.offset(dx, dy, dz);
            if in_box(q, lo, hi) && legal_step(w, p, q) {
                out.push(q);
            }
        }
    }
    out
}

/// Distances of every standing cell reachable from `start` inside the box.
pub fn bfs(w: &VoxelWorld, start: Pos, lo: Pos, hi: Pos) -> BTreeMap<Pos, u32> {
    let mut dist = BTreeMap::new();
    let mut queue = VecDeque::new();
    dist.insert(start, 0);
    queue.push_back(start);
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        for q in neighbours(w, p, lo, hi) {
            if !dist.contains_key(&q) {
                dist.insert(q, d + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

fn within_reach(feet: Pos, t: Pos) -> bool {
    let eye = Vec3::new(feet.x as f64 + 0.5, feet.y as f64 + 1.6, feet.z as f64 + 0.5);
    let c = Vec3::new(t.x as f64 + 0.5, t.y as f64 + 0.5, t.z as f64 + 0.5);
    let body = t == feet || t == feet.offset(0, 1, 0);
    !body && eye.distance(c) <= REACH
}

/// A random obstacle course inside a box of at most 32 cells per side.
pub fn obstacle_world(rng: &mut ChaCha8Rng) -> (VoxelWorld, Pos, Pos) {
    let mut w = generate_world(rng.gen_range(0..1000), WorldKind::Flat);
    let s = w.spawn();
    let (sx, sy, sz) = (rng.gen_range(4..=32), rng.gen_range(3..=32), rng.gen_range(4..=32));
    let lo = Pos::new(s.x - sx / 2, s.y, s.z - sz / 2);
    let hi = Pos::new(lo.x + sx - 1, lo.y + sy - 1, lo.z + sz - 1);
    let density = rng.gen_range(0.05..0.45);
    for x in lo.x..=hi.x {
        for z in lo.z..=hi.z {
            // columns of random height with occasional overhangs
            let h = rng.gen_range(0..=4.min(sy));
            for y in 0..h {
                if rng.gen_bool(density) || y == 0 {
                    let b = if rng.gen() { BlockId::Stone } else { BlockId::Dirt };
                    w.set_block(Pos::new(x, lo.y + y, z), b);
                }
            }
        }
    }
    (w, lo, hi)
}

/// A* finds a path exactly when breadth-first search reaches a goal cell,
/// the path is as short, and every step is a legal move.
pub fn check_astar_vs_bfs(seed: u64) -> Check {
    let mut r = rng(seed);
    let (w, lo, hi) = obstacle_world(&mut r);
    let standing: Vec<Pos> = (lo.x..=hi.x)
        .flat_map(|x| (lo.y..=hi.y).flat_map(move |y| (lo.z..=hi.z).map(move |z| Pos::new(x, y, z))))
        .filter(|p| can_stand(&w, *p))
        .collect();
    let Some(&start) = standing.choose(&mut r) else {
        return Ok(());
    };
    let dist = bfs(&w, start, lo, hi);
    let limits = PathLimits {
        node_budget: 1_000_000,
        bounds: Some((lo, hi)),
    };
    for _ in 0..3 {
        let target = Pos::new(
            r.gen_range(lo.x..=hi.x),
            r.gen_range(lo.y..=hi.y),
            r.gen_range(lo.z..=hi.z),
        );
        let (goal, ok): (Goal, Box<dyn Fn(Pos) -> bool>) = match r.gen_range(0..3) {
            0 => (Goal::Exact(target), Box::new(move |p| p == target)),
            1 => (Goal::Reach(target), Box::new(move |p| within_reach(p, target))),
            _ => {
                let range = r.gen_range(0.5..4.0);
                let c = Vec3::new(target.x as f64 + 0.5, target.y as f64 + 0.5, target.z as f64 + 0.5);
                (
                    Goal::Near(target, range),
                    Box::new(move |p: Pos| {
                        Vec3::new(p.x as f64 + 0.5, p.y as f64 + 0.5, p.z as f64 + 0.5).distance(c) <= range
                    }),
                )
            }
        };
        let best = dist.iter().filter(|(p, _)| ok(**p)).map(|(_, d)| *d).min();
        match (find_path(&w, start, goal, &limits), best) {
            (Ok(path), Some(d)) => {
                if path.len() as u32 != d {
                    return Err(format!(
                        "seed {seed}: {goal:?} from {start}: path of {} moves, shortest is {d}",
                        path.len()
                    ));
                }
                let mut cur = start;
                for p in &path {
                    if !legal_step(&w, cur, *p) || !in_box(*p, lo, hi) {
                        return Err(format!("seed {seed}: illegal step {cur} -> {p}"));
                    }
                    cur = *p;
                }
                if !ok(cur) {
                    return Err(format!("seed {seed}: path to {goal:?} ends at {cur}"));
                }
            }
            (Err(e), None) if e == voxagent_core::actlang::path::PathError::NoPath => {}
            (got, want) => {
                return Err(format!(
                    "seed {seed}: {goal:?} from {start}: A* gave {got:?}, search says {want:?}"
                ));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Structure templates

pub const TEMPLATES: [Template; 5] = [
    Template::Pole,
    Template::Wall,
    Template::Stairs,
    Template::Portal,
    Template::Pyramid,
];

fn material(t: Template) -> BlockId {
    match t {
        Template::Pole | Template::Wall | Template::Stairs => BlockId::OakPlanks,
        Template::Pyramid => BlockId::SprucePlanks,
        Template::Portal => BlockId::Obsidian,
    }
}

/// A site near spawn with grass underfoot and open air above.
fn clear_site(w: &VoxelWorld) -> Pos {
    let s = w.spawn();
    for r in 2..40 {
        for dx in -r..=r {
            let base = s.offset(dx, 0, r);
            let open = (-2..9).all(|x| {
                (-2..9).all(|z| {
                    (0..8).all(|y| w.block_at(base.offset(x, y, z)).is_air())
                        && w.block_at(base.offset(x, -1, z)) == BlockId::GrassBlock
                })
            });
            if open {
                return base;
            }
        }
    }
    panic!("no open site near spawn");
}

/// The template built by hand on a flat world, with the portal lit.
pub fn build(t: Template, seed: u64) -> (VoxelWorld, VoxelWorld) {
    let before = generate_world(seed, WorldKind::Flat);
    let base = clear_site(&before);
    let mut after = before.clone();
    for c in t.shape().required {
        after.set_block(base + c, material(t));
    }
    if t == Template::Portal {
        ignite(&mut after, base.offset(1, 1, 0)).expect("frame lights");
    }
    (before, after)
}

/// Deletes one placed block, or moves it to an empty cell nearby; the
/// result must never verify.
pub fn check_perturbations(t: Template, n: usize, seed: u64) -> Check {
    let (before, after) = build(t, 1);
    let d = world_diff(&before, &after).map_err(|e| e.to_string())?;
    let r = verify_structure(t, &d, &after);
    if !r.success {
        return Err(format!("{}: the unperturbed build fails: {}", t.name(), r.reason));
    }
    let placed: Vec<(Pos, BlockId)> = d.added.clone();
    let lo = placed.iter().fold(placed[0].0, |m, (p, _)| {
        Pos::new(m.x.min(p.x), m.y.min(p.y), m.z.min(p.z))
    });
    let hi = placed.iter().fold(placed[0].0, |m, (p, _)| {
        Pos::new(m.x.max(p.x), m.y.max(p.y), m.z.max(p.z))
    });
    let mut r = rng(seed);
    for i in 0..n {
        let mut w = after.clone();
        let (p, b) = *placed.choose(&mut r).unwrap();
        w.set_block(p, BlockId::Air);
        let what = if r.gen() {
            let q = loop {
                let q = Pos::new(
                    r.gen_range(lo.x - 2..=hi.x + 2),
                    r.gen_range(lo.y..=hi.y + 2),
                    r.gen_range(lo.z - 2..=hi.z + 2),
                );
                if q != p && w.block_at(q).is_air() {
                    break q;
                }
            };
            w.set_block(q, b);
            format!("moved {p} to {q}")
        } else {
            format!("deleted {p}")
        };
        let d = world_diff(&before, &w).map_err(|e| e.to_string())?;
        if verify_structure(t, &d, &w).success {
            return Err(format!("{} perturbation {i}: {what} still verifies", t.name()));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shape canonicalization

fn quarter_turns(p: Pos, k: u32) -> Pos {
    let (mut x, mut z) = (p.x, p.z);
    for _ in 0..k {
        (x, z) = (-z, x);
    }
    Pos::new(x, p.y, z)
}

fn to_origin(s: &BTreeMap<Pos, BlockId>) -> BTreeSet<(Pos, BlockId)> {
    let min = s.keys().fold(Pos::new(i32::MAX, i32::MAX, i32::MAX), |m, p| {
        Pos::new(m.x.min(p.x), m.y.min(p.y), m.z.min(p.z))
    });
    s.iter().map(|(p, b)| (*p - min, *b)).collect()
}

/// Whether one shape is a translated quarter turn of the other, trying all
/// four turns.
pub fn congruent(a: &[(Pos, BlockId)], b: &[(Pos, BlockId)]) -> bool {
    let a: BTreeMap<Pos, BlockId> = a.iter().copied().collect();
    let b: BTreeMap<Pos, BlockId> = b.iter().copied().collect();
    let target = to_origin(&b);
    (0..4).any(|k| to_origin(&a.iter().map(|(p, v)| (quarter_turns(*p, k), *v)).collect()) == target)
}

pub fn random_shape(r: &mut ChaCha8Rng) -> Vec<(Pos, BlockId)> {
    let n = r.gen_range(1..=10);
    let side = r.gen_range(1..=4);
    let palette = [BlockId::OakPlanks, BlockId::Dirt, BlockId::Obsidian];
    let kinds = r.gen_range(1..=3);
    (0..n)
        .map(|_| {
            let p = Pos::new(r.gen_range(0..side), r.gen_range(0..side), r.gen_range(0..side));
            (p, palette[r.gen_range(0..kinds)])
        })
        .collect()
}

fn moved(s: &[(Pos, BlockId)], r: &mut ChaCha8Rng) -> (Vec<(Pos, BlockId)>, u32) {
    let k = r.gen_range(0..4);
    let t = Pos::new(r.gen_range(-200..200), r.gen_range(-30..30), r.gen_range(-200..200));
    (s.iter().map(|(p, b)| (quarter_turns(*p, k) + t, *b)).collect(), k)
}

/// Signature invariance under translation and every quarter turn,
/// idempotence, and agreement with brute-force congruence.
pub fn check_canonical(seed: u64) -> Check {
    let mut r = rng(seed);
    let s = random_shape(&mut r);
    let c = canonicalize(&s).map_err(|e| e.to_string())?;
    let again = canonicalize(&c.blocks).map_err(|e| e.to_string())?;
    if again != c {
        return Err(format!("seed {seed}: canonicalize is not idempotent"));
    }
    for k in 0..4 {
        let t = Pos::new(r.gen_range(-200..200), r.gen_range(-30..30), r.gen_range(-200..200));
        let m: Vec<(Pos, BlockId)> = s.iter().map(|(p, b)| (quarter_turns(*p, k) + t, *b)).collect();
        let cm = canonicalize(&m).map_err(|e| e.to_string())?;
        if cm != c {
            return Err(format!(
                "seed {seed}: {k} quarter turns and a shift by {t} change the canonical form"
            ));
        }
    }
    // a second shape: unrelated, a moved copy, or a moved copy with one edit
    let other = match r.gen_range(0..3) {
        0 => random_shape(&mut r),
        1 => moved(&s, &mut r).0,
        _ => {
            let (mut m, _) = moved(&s, &mut r);
            let i = r.gen_range(0..m.len());
            if r.gen() {
                m[i].1 = BlockId::Stone;
            } else {
                m[i].0 = m[i].0.offset(0, r.gen_range(1..3), 0);
            }
            m
        }
    };
    let co = canonicalize(&other).map_err(|e| e.to_string())?;
    let same = co.signature == c.signature;
    if same != congruent(&s, &other) {
        return Err(format!(
            "seed {seed}: signatures {} but congruence says {}",
            if same { "agree" } else { "differ" },
            !same
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Skill retrieval

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Character trigram counts hashed into the embedding width, scaled to
/// unit length.
pub fn oracle_embedding(text: &str) -> Vec<f64> {
    let chars: Vec<char> = text.to_lowercase().chars().collect();
    let mut v = vec![0.0; EMBED_DIM];
    if chars.is_empty() {
        return v;
    }
    let grams: Vec<String> = if chars.len() < 3 {
        vec![chars.iter().collect()]
    } else {
        (0..chars.len() - 2).map(|i| chars[i..i + 3].iter().collect()).collect()
    };
    for g in grams {
        v[(fnv1a(g.as_bytes()) % EMBED_DIM as u64) as usize] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

const VOCAB: &[&str] = &[
    "mine", "craft", "build", "a", "wooden", "stone", "iron", "pickaxe", "log", "logs", "oak", "spruce", "planks",
    "sticks", "furnace", "table", "pole", "wall", "stairs", "pyramid", "portal", "smelt", "ore", "coal", "dirt",
    "collect", "three", "four", "tall", "nether",
];

fn phrase(r: &mut ChaCha8Rng, lo: usize, hi: usize) -> String {
    let n = r.gen_range(lo..=hi);
    (0..n).map(|_| *VOCAB.choose(r).unwrap()).collect::<Vec<_>>().join(" ")
}

pub fn random_library(r: &mut ChaCha8Rng, n: usize) -> SkillLibrary {
    let mut lib = SkillLibrary::default();
    for i in 0..n {
        let task = phrase(r, 1, 5);
        let src = if r.gen() {
            format!("chat(\"{}\");\n", phrase(r, 1, 4))
        } else {
            "chat(1);\n".to_owned()
        };
        lib.add_skill(&task, &src, i as u32).expect("valid skill");
    }
    lib
}

/// Top-k by the library equals a full sort of brute-force cosine scores,
/// ties kept in insertion order.
pub fn check_retrieval(lib: &SkillLibrary, query: &str) -> Check {
    let q = oracle_embedding(query);
    let mut scored: Vec<(f64, usize)> = lib
        .skills
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (
                oracle_embedding(&s.description)
                    .iter()
                    .zip(&q)
                    .map(|(a, b)| a * b)
                    .sum(),
                i,
            )
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for k in [1, 3, 5, 10, lib.len()] {
        let got = lib.retrieve(query, k);
        if got.len() != k.min(lib.len()) {
            return Err(format!("{query:?}: top-{k} returned {} skills", got.len()));
        }
        for (rank, s) in got.iter().enumerate() {
            let (want_score, want) = scored[rank];
            if s.name != lib.skills[want].name {
                // only a tie may reorder
                let got_score = scored.iter().find(|(_, i)| lib.skills[*i].name == s.name).unwrap().0;
                if (got_score - want_score).abs() > 1e-12 {
                    return Err(format!(
                        "{query:?}: rank {rank} of top-{k} is {}, expected {}",
                        s.name, lib.skills[want].name
                    ));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Rendering

/// Entry distance of a ray into a unit cell and the face it enters
/// through, by the slab method.
pub fn slab(origin: Vec3, dir: Vec3, cell: Pos) -> Option<(f64, Face)> {
    let o = [origin.x, origin.y, origin.z];
    let d = [dir.x, dir.y, dir.z];
    let c = [cell.x as f64, cell.y as f64, cell.z as f64];
    let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
    let mut axis = None;
    for i in 0..3 {
        if d[i] == 0.0 {
            if o[i] < c[i] || o[i] >= c[i] + 1.0 {
                return None;
            }
            continue;
        }
        let (a, b) = ((c[i] - o[i]) / d[i], (c[i] + 1.0 - o[i]) / d[i]);
        let (near, far) = if a < b { (a, b) } else { (b, a) };
        if near > t0 {
            t0 = near;
            axis = Some(i);
        }
        t1 = t1.min(far);
    }
    if t0 > t1 {
        return None;
    }
    let face = match axis? {
        0 if d[0] > 0.0 => Face::NegX,
        0 => Face::PosX,
        1 if d[1] > 0.0 => Face::NegY,
        1 => Face::PosY,
        _ if d[2] > 0.0 => Face::NegZ,
        _ => Face::PosZ,
    };
    Some((t0, face))
}

/// Non-air cells with an open side near `centre`: the only cells a ray
/// from inside the air can enter first.
pub fn exposed_cells(w: &VoxelWorld, centre: Pos, r: i32) -> Vec<(Pos, BlockId)> {
    let mut out = Vec::new();
    for x in -r..=r {
        for z in -r..=r {
            for y in -r..=r {
                let p = centre.offset(x, y, z);
                let b = w.block_at(p);
                if !b.is_air() && p.neighbors6().iter().any(|n| w.block_at(*n).is_air()) {
                    out.push((p, b));
                }
            }
        }
    }
    out
}

/// Brute-force first hit: the cell with the smallest entry distance among
/// all candidates, with any cells entered at the same distance.
pub fn first_hit(origin: Vec3, dir: Vec3, cells: &[(Pos, BlockId)], max: f64) -> Vec<(f64, Pos, BlockId, Face)> {
    let mut hits: Vec<(f64, Pos, BlockId, Face)> = cells
        .iter()
        .filter_map(|(p, b)| slab(origin, dir, *p).map(|(t, f)| (t, *p, *b, f)))
        .filter(|h| h.0 < max)
        .collect();
    hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let Some(best) = hits.first().map(|h| h.0) else {
        return Vec::new();
    };
    hits.retain(|h| h.0 - best < 1e-9);
    hits
}

pub const SOUNDNESS_RANGE: f64 = 8.0;

/// Random blocks around a floating camera; every pixel's hit and color and
/// the set of visible blocks must match the brute-force ray casts within
/// [`SOUNDNESS_RANGE`].
pub fn check_visibility(seed: u64) -> Check {
    let mut r = rng(seed);
    let mut w = generate_world(r.gen_range(0..1000), WorldKind::Flat);
    let feet = w
        .spawn()
        .offset(r.gen_range(-3..=3), r.gen_range(0..=3), r.gen_range(-3..=3));
    let palette = [
        BlockId::Stone,
        BlockId::OakPlanks,
        BlockId::Cobblestone,
        BlockId::Obsidian,
        BlockId::Dirt,
        BlockId::OakLog,
    ];
    for _ in 0..r.gen_range(10..40) {
        let p = feet.offset(r.gen_range(-6..=6), r.gen_range(-1..=5), r.gen_range(-6..=6));
        if p != feet && p != feet.offset(0, 1, 0) {
            w.set_block(p, *palette.choose(&mut r).unwrap());
        }
    }
    let mut agent = AgentState::new(feet);
    agent.yaw = r.gen_range(0.0..360.0);
    agent.pitch = r.gen_range(-60.0..30.0);
    let cam = Camera::at_agent(&agent, 48, 36);
    let out = render(&w, &cam);
    let cells = exposed_cells(&w, cam.position.floor(), SOUNDNESS_RANGE as i32 + 1);
    let mut seen = BTreeSet::new();
    let mut expected = BTreeSet::new();
    for py in 0..cam.height {
        for px in 0..cam.width {
            let dir = cam.ray(px, py).normalized();
            let got = out.hits[(py * cam.width + px) as usize];
            let want = first_hit(cam.position, dir, &cells, SOUNDNESS_RANGE);
            let near = |p: Pos| slab(cam.position, dir, p).is_some_and(|(t, _)| t < SOUNDNESS_RANGE);
            match (got, want.first()) {
                (Some(g), Some(_)) if want.iter().any(|h| h.1 == g) => {
                    let h = want.iter().find(|h| h.1 == g).unwrap();
                    seen.insert(g);
                    expected.insert(g);
                    if want.len() == 1 {
                        let hit = Hit {
                            pos: h.1,
                            block: h.2,
                            face: h.3,
                            dist: h.0,
                        };
                        if out.image.pixel(px, py) != shade(Some(&hit), dir) {
                            return Err(format!("seed {seed}: pixel ({px}, {py}) has the wrong color for {g}"));
                        }
                    }
                }
                (got, None) if got.map_or(true, |g| !near(g)) => {}
                (got, want) => {
                    return Err(format!(
                        "seed {seed}: pixel ({px}, {py}) hit {got:?}, brute force says {:?}",
                        want.map(|h| h.1)
                    ));
                }
            }
            // the renderer's hits are ordinary ray casts
            if raycast(&w, cam.position, dir, voxagent_core::perception::MAX_RAY_DIST)
                .unwrap()
                .map(|h| h.pos)
                != got
            {
                return Err(format!(
                    "seed {seed}: pixel ({px}, {py}) disagrees with a direct ray cast"
                ));
            }
        }
    }
    if seen != expected {
        return Err(format!("seed {seed}: visible block sets differ"));
    }
    Ok(())
}

/// Screen rows covered by a 3-high pole five blocks straight ahead on the
/// center column, by diffing renders with and without it; also returns the
/// analytic top and bottom edges.
pub fn pole_rows(width: u32, height: u32) -> Result<((u32, u32), (f64, f64)), String> {
    let empty = generate_world(1, WorldKind::Flat);
    let agent = empty.spawn_agent();
    let mut pole = empty.clone();
    for y in 0..3 {
        pole.set_block(agent.feet.offset(0, y, -5), BlockId::OakPlanks);
    }
    let cam = Camera::at_agent(&agent, width, height);
    let a = render(&empty, &cam).image;
    let b = render(&pole, &cam).image;
    let cx = width / 2;
    let rows: Vec<u32> = (0..height).filter(|y| a.pixel(cx, *y) != b.pixel(cx, *y)).collect();
    let (Some(&top), Some(&bottom)) = (rows.first(), rows.last()) else {
        return Err("the pole is not visible".into());
    };
    if rows.len() as u32 != bottom - top + 1 {
        return Err(format!("pole pixels are not contiguous: {rows:?}"));
    }
    let plank = tables().block(BlockId::OakPlanks).color;
    for y in &rows {
        let px = b.pixel(cx, *y);
        let near = px
            .iter()
            .zip(plank)
            .all(|(p, c)| (*p as f64 - c as f64 * 0.7).abs() <= 1.0);
        if !near {
            return Err(format!("row {y} is {px:?}, not the plank front face"));
        }
    }
    // the front face is 4.5 blocks ahead of the eye; its top edge is 1.4
    // above eye level and its bottom edge 1.6 below
    let f = (height as f64 / 2.0) / (35.0f64).to_radians().tan();
    let half = height as f64 / 2.0;
    Ok(((top, bottom + 1), (half - f * 1.4 / 4.5, half + f * 1.6 / 4.5)))
}

// ---------------------------------------------------------------------------
// World bookkeeping

const STOCK: &[&str] = &[
    "oak_log",
    "spruce_log",
    "oak_planks",
    "spruce_planks",
    "stick",
    "cobblestone",
    "raw_iron",
    "coal",
    "dirt",
    "crafting_table",
    "furnace",
    "wooden_pickaxe",
    "stone_pickaxe",
];

fn inventory_map(a: &AgentState) -> BTreeMap<String, i64> {
    a.inventory.iter().map(|(k, v)| (k.to_owned(), v as i64)).collect()
}

fn delta(before: &BTreeMap<String, i64>, after: &BTreeMap<String, i64>) -> BTreeMap<String, i64> {
    let keys: BTreeSet<&String> = before.keys().chain(after.keys()).collect();
    keys.into_iter()
        .map(|k| {
            (
                k.clone(),
                after.get(k).copied().unwrap_or(0) - before.get(k).copied().unwrap_or(0),
            )
        })
        .filter(|(_, d)| *d != 0)
        .collect()
}

fn edits(w: &VoxelWorld) -> Vec<(Pos, BlockId)> {
    w.edits().collect()
}

#[derive(Debug, Clone)]
pub enum Op {
    Break(Pos),
    Place(Pos, String),
    Craft(String, u32),
    Smelt(String, u32, String),
    Equip(String),
}

pub fn random_ops(r: &mut ChaCha8Rng, n: usize) -> Vec<Op> {
    let outputs: Vec<String> = tables().recipes.iter().map(|x| x.output.clone()).collect();
    let near = |r: &mut ChaCha8Rng| Pos::new(r.gen_range(-4..=4), r.gen_range(-3..=4), r.gen_range(-4..=4));
    (0..n)
        .map(|_| match r.gen_range(0..10) {
            0..=2 => Op::Break(near(r)),
            3..=5 => Op::Place(near(r), STOCK.choose(r).unwrap().to_string()),
            6 | 7 => Op::Craft(outputs.choose(r).unwrap().clone(), r.gen_range(1..=3)),
            8 => Op::Smelt(
                ["raw_iron", "oak_log", "cobblestone"].choose(r).unwrap().to_string(),
                r.gen_range(1..=4),
                ["coal", "oak_planks", "oak_log", "stick"]
                    .choose(r)
                    .unwrap()
                    .to_string(),
            ),
            _ => Op::Equip(
                ["wooden_pickaxe", "stone_pickaxe", "dirt"]
                    .choose(r)
                    .unwrap()
                    .to_string(),
            ),
        })
        .collect()
}

pub fn stocked_agent(w: &VoxelWorld, r: &mut ChaCha8Rng) -> AgentState {
    let mut a = w.spawn_agent();
    for item in STOCK {
        if r.gen_bool(0.7) {
            let n = if item.ends_with("pickaxe") {
                1
            } else {
                r.gen_range(1..=20)
            };
            a.give(item, n).expect("room");
        }
    }
    a
}

/// Applies one primitive; `Ok(true)` when it took effect.
pub fn apply_op(w: &mut VoxelWorld, a: &mut AgentState, op: &Op) -> bool {
    let feet = a.feet;
    match op {
        Op::Break(d) => break_block(w, a, feet + *d).is_ok(),
        Op::Place(d, item) => place_block(w, a, feet + *d, item).is_ok(),
        Op::Craft(item, n) => craft(w, a, item, *n).is_ok(),
        Op::Smelt(item, n, fuel) => smelt(w, a, item, *n, fuel).is_ok(),
        Op::Equip(item) => voxagent_core::world::equip(a, item).is_ok(),
    }
}

/// Inventory and world changes of each primitive balance against the drop,
/// recipe, smelting and fuel tables; failed primitives change nothing.
pub fn check_conservation(seed: u64) -> Check {
    let mut r = rng(seed);
    let mut w = generate_world(r.gen_range(0..100), WorldKind::Flat);
    let mut a = stocked_agent(&w, &mut r);
    // stations next to the agent so that crafting and smelting can succeed
    for (dx, item) in [(2, "furnace"), (-2, "crafting_table")] {
        let p = a.feet.offset(dx, 0, 0);
        let _ = place_block(&mut w, &mut a, p, item);
    }
    let t = tables();
    for (i, op) in random_ops(&mut r, 40).iter().enumerate() {
        let (w0, inv0) = (edits(&w), inventory_map(&a));
        let target = match op {
            Op::Break(d) | Op::Place(d, _) => Some(a.feet + *d),
            _ => None,
        };
        let was = target.map(|p| w.block_at(p));
        let ok = apply_op(&mut w, &mut a, op);
        let dv = delta(&inv0, &inventory_map(&a));
        let fail = |m: String| Err(format!("seed {seed} op {i} {op:?}: {m}"));
        if !ok {
            if edits(&w) != w0 || !dv.is_empty() {
                return fail("a failed primitive changed the state".into());
            }
            continue;
        }
        let mut want: BTreeMap<String, i64> = BTreeMap::new();
        match op {
            Op::Break(_) => {
                let b = was.unwrap();
                let drop = t.block(b).drop.clone().unwrap_or_else(|| b.name().to_owned());
                *want.entry(drop).or_default() += 1;
                if !w.block_at(target.unwrap()).is_air() {
                    return fail("the block is still there".into());
                }
            }
            Op::Place(_, item) => {
                *want.entry(item.clone()).or_default() -= 1;
                if w.block_at(target.unwrap()).name() != item {
                    return fail("the block was not placed".into());
                }
            }
            Op::Craft(item, n) => {
                let rec = t.recipe(item).unwrap();
                *want.entry(rec.output.clone()).or_default() += (rec.count * n) as i64;
                for (input, k) in &rec.inputs {
                    let need = (k * n) as i64;
                    match input.strip_prefix('#') {
                        None => *want.entry(input.clone()).or_default() -= need,
                        Some(tag) => {
                            // any mix of the tag's members, as long as the total matches
                            let members = &t.tags[tag];
                            let taken: i64 = members.iter().map(|m| -dv.get(m).copied().unwrap_or(0)).sum();
                            if taken != need || members.iter().any(|m| dv.get(m).copied().unwrap_or(0) > 0) {
                                return fail(format!("took {taken} of #{tag}, recipe needs {need}"));
                            }
                            for m in members {
                                if let Some(d) = dv.get(m) {
                                    *want.entry(m.clone()).or_default() += d;
                                }
                            }
                        }
                    }
                }
                if edits(&w) != w0 {
                    return fail("crafting changed the world".into());
                }
            }
            Op::Smelt(item, n, fuel) => {
                let out = t.smelt_output(item).unwrap();
                let v = t.fuel_value(fuel).unwrap();
                let burn = (1..).find(|b| (*b as f64 * v).floor() as u32 >= *n).unwrap() as i64;
                *want.entry(out.to_owned()).or_default() += *n as i64;
                *want.entry(item.clone()).or_default() -= *n as i64;
                *want.entry(fuel.clone()).or_default() -= burn;
                if edits(&w) != w0 {
                    return fail("smelting changed the world".into());
                }
            }
            Op::Equip(_) => {}
        }
        want.retain(|_, v| *v != 0);
        if dv != want {
            return fail(format!("inventory moved by {dv:?}, tables say {want:?}"));
        }
    }
    Ok(())
}

/// The same seed and primitive sequence give the same world and inventory.
pub fn check_determinism(seed: u64) -> Check {
    let run = || {
        let mut r = rng(seed);
        let mut w = generate_world(
            r.gen_range(0..100),
            if r.gen() { WorldKind::Flat } else { WorldKind::Regular },
        );
        let mut a = stocked_agent(&w, &mut r);
        for op in random_ops(&mut r, 30) {
            apply_op(&mut w, &mut a, &op);
        }
        (w.fingerprint(), edits(&w), a)
    };
    let (f1, e1, a1) = run();
    let (f2, e2, a2) = run();
    if f1 != f2 || e1 != e2 || a1 != a2 {
        return Err(format!("seed {seed}: two runs differ"));
    }
    Ok(())
}

/// Applying the diff of a random edit sequence to the starting world
/// reproduces the end state.
pub fn check_diff_apply(seed: u64) -> Check {
    let mut r = rng(seed);
    let before = generate_world(
        r.gen_range(0..100),
        if r.gen() { WorldKind::Flat } else { WorldKind::Regular },
    );
    let mut after = before.clone();
    let s = before.spawn();
    for _ in 0..r.gen_range(0..60) {
        let p = s.offset(r.gen_range(-5..=5), r.gen_range(-4..=4), r.gen_range(-5..=5));
        let b = *BlockId::ALL.choose(&mut r).unwrap();
        after.set_block(p, b);
    }
    let d = world_diff(&before, &after).map_err(|e| e.to_string())?;
    let mut replay = before.clone();
    apply_diff(&mut replay, &d);
    if edits(&replay) != edits(&after) || replay.fingerprint() != after.fingerprint() {
        return Err(format!("seed {seed}: applying the diff does not give the end state"));
    }
    let removed: BTreeMap<Pos, BlockId> = d.removed.iter().copied().collect();
    if d.added.iter().any(|(p, b)| removed.get(p) == Some(b)) {
        return Err(format!(
            "seed {seed}: a cell is both added and removed with the same block"
        ));
    }
    Ok(())
}
