use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{BinOp, Call, Expr, FnDef, Program, Span, Stmt, StmtKind, UnOp};
use super::path::{find_path, moves, Goal, PathError, PathLimits};
use crate::geom::Pos;
use crate::world::{
    self, break_block, place_block, tables, AgentState, BlockId, VoxelWorld, WorldError, STATION_RANGE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecLimits {
    pub max_steps: u64,
    pub search_radius: i32,
    pub path_node_budget: usize,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits {
            max_steps: 10_000,
            search_radius: 32,
            path_node_budget: super::path::DEFAULT_NODE_BUDGET,
        }
    }
}

/// Radius within which `explore` looks for its target block.
pub const EXPLORE_SIGHT: i32 = 16;
/// How many of the nearest candidates `mine` tries to path to.
pub const MINE_CANDIDATES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecStatus {
    Ok,
    Error { message: String, span: Span },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecResult {
    pub status: ExecStatus,
    pub chat_log: Vec<String>,
    pub steps_used: u64,
}

impl ExecResult {
    pub fn is_ok(&self) -> bool {
        self.status == ExecStatus::Ok
    }

    /// Error text in the form fed back to the action agent.
    pub fn error_text(&self) -> Option<String> {
        match &self.status {
            ExecStatus::Ok => None,
            ExecStatus::Error { message, span } => Some(format!("{message} (at {span})")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Str(String),
    Bool(bool),
    Pos(Pos),
    None,
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Str(_) => "string",
            Value::Bool(_) => "boolean",
            Value::Pos(_) => "position",
            Value::None => "none",
        }
    }

    pub fn render(&self) -> String {
        match self {
            Value::Int(n) => n.to_string(),
            Value::Str(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Pos(p) => format!("({}, {}, {})", p.x, p.y, p.z),
            Value::None => "none".into(),
        }
    }
}

struct Halt {
    message: String,
    span: Span,
}

fn halt(span: Span, message: impl Into<String>) -> Halt {
    Halt {
        message: message.into(),
        span,
    }
}

type R<T> = Result<T, Halt>;

/// Runs a checked program. Effects on `world` and `agent` are kept even when
/// execution stops with an error.
pub fn execute(program: &Program, world: &mut VoxelWorld, agent: &mut AgentState, limits: &ExecLimits) -> ExecResult {
    let mut m = Machine {
        fns: program.functions.iter().map(|f| (f.name.as_str(), f)).collect(),
        world,
        agent,
        limits: *limits,
        steps: 0,
        chat: Vec::new(),
    };
    let mut env = Env::default();
    let status = match m.block(&program.body, &mut env) {
        Ok(()) => ExecStatus::Ok,
        Err(h) => ExecStatus::Error {
            message: h.message,
            span: h.span,
        },
    };
    ExecResult {
        status,
        chat_log: m.chat,
        steps_used: m.steps,
    }
}

#[derive(Default)]
struct Env {
    frames: Vec<BTreeMap<String, Value>>,
}

impl Env {
    fn get(&self, n: &str) -> Option<&Value> {
        self.frames.iter().rev().find_map(|f| f.get(n))
    }

    fn set(&mut self, n: &str, v: Value) -> bool {
        for f in self.frames.iter_mut().rev() {
            if let Some(slot) = f.get_mut(n) {
                *slot = v;
                return true;
            }
        }
        false
    }

    fn define(&mut self, n: &str, v: Value) {
        if self.frames.is_empty() {
            self.frames.push(BTreeMap::new());
        }
        self.frames.last_mut().expect("frame").insert(n.to_string(), v);
    }
}

struct Machine<'a> {
    fns: BTreeMap<&'a str, &'a FnDef>,
    world: &'a mut VoxelWorld,
    agent: &'a mut AgentState,
    limits: ExecLimits,
    steps: u64,
    chat: Vec<String>,
}

impl<'a> Machine<'a> {
    fn tick(&mut self, n: u64, span: Span) -> R<()> {
        if self.steps + n > self.limits.max_steps {
            self.steps = self.limits.max_steps;
            return Err(halt(span, "step budget exhausted"));
        }
        self.steps += n;
        Ok(())
    }

    fn block(&mut self, body: &'a [Stmt], env: &mut Env) -> R<()> {
        env.frames.push(BTreeMap::new());
        let r = body.iter().try_for_each(|s| self.stmt(s, env));
        env.frames.pop();
        r
    }

    fn stmt(&mut self, s: &'a Stmt, env: &mut Env) -> R<()> {
        self.tick(1, s.span)?;
        match &s.kind {
            StmtKind::Let(n, e) => {
                let v = self.eval(e, env, s.span)?;
                env.define(n, v);
            }
            StmtKind::Assign(n, e) => {
                let v = self.eval(e, env, s.span)?;
                if !env.set(n, v) {
                    return Err(halt(s.span, format!("undefined variable `{n}`")));
                }
            }
            StmtKind::Repeat { count, var, body } => {
                for i in 0..*count {
                    env.frames.push(BTreeMap::new());
                    if let Some(v) = var {
                        env.define(v, Value::Int(i as i64));
                    }
                    let r = self.block(body, env);
                    env.frames.pop();
                    r?;
                }
            }
            StmtKind::If { cond, then, otherwise } => {
                let c = self.eval(cond, env, s.span)?;
                let c = truthy(&c, s.span)?;
                if c {
                    self.block(then, env)?;
                } else if let Some(b) = otherwise {
                    self.block(b, env)?;
                }
            }
            StmtKind::Expr(e) => {
                self.eval(e, env, s.span)?;
            }
        }
        Ok(())
    }

    fn eval(&mut self, e: &'a Expr, env: &mut Env, at: Span) -> R<Value> {
        Ok(match e {
            Expr::Int(n) => Value::Int(*n),
            Expr::Str(s) => Value::Str(s.clone()),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::None => Value::None,
            Expr::Var(n, span) => env
                .get(n)
                .cloned()
                .ok_or_else(|| halt(*span, format!("undefined variable `{n}`")))?,
            Expr::Unary(UnOp::Not, a) => {
                let v = self.eval(a, env, at)?;
                Value::Bool(!truthy(&v, at)?)
            }
            Expr::Unary(UnOp::Neg, a) => match self.eval(a, env, at)? {
                Value::Int(n) => Value::Int(n.checked_neg().ok_or_else(|| overflow(at))?),
                Value::Pos(p) => Value::Pos(checked_pos(Pos::ORIGIN, p, -1, at)?),
                v => return Err(halt(at, format!("cannot negate a {}", v.type_name()))),
            },
            Expr::Binary(BinOp::And, a, b) => {
                let l = self.eval(a, env, at)?;
                if !truthy(&l, at)? {
                    Value::Bool(false)
                } else {
                    let r = self.eval(b, env, at)?;
                    Value::Bool(truthy(&r, at)?)
                }
            }
            Expr::Binary(BinOp::Or, a, b) => {
                let l = self.eval(a, env, at)?;
                if truthy(&l, at)? {
                    Value::Bool(true)
                } else {
                    let r = self.eval(b, env, at)?;
                    Value::Bool(truthy(&r, at)?)
                }
            }
            Expr::Binary(op, a, b) => {
                let l = self.eval(a, env, at)?;
                let r = self.eval(b, env, at)?;
                binary(*op, l, r, at)?
            }
            Expr::Call(c) => self.call(c, env)?,
        })
    }

    fn call(&mut self, c: &'a Call, env: &mut Env) -> R<Value> {
        let mut args = Vec::with_capacity(c.args.len());
        for a in &c.args {
            args.push(self.eval(a, env, c.span)?);
        }
        if let Some(f) = self.fns.get(c.name.as_str()).copied() {
            let mut inner = Env::default();
            inner.frames.push(BTreeMap::new());
            for (p, v) in f.params.iter().zip(args) {
                inner.define(p, v);
            }
            self.block(&f.body, &mut inner)?;
            return Ok(Value::None);
        }
        self.builtin(c, args)
    }

    fn builtin(&mut self, c: &Call, args: Vec<Value>) -> R<Value> {
        let sp = c.span;
        let a = Args {
            v: args,
            span: sp,
            name: &c.name,
        };
        Ok(match c.name.as_str() {
            "pos" => Value::Pos(Pos::new(a.coord(0)?, a.coord(1)?, a.coord(2)?)),
            "rel" => Value::Pos(self.agent.feet.offset(a.coord(0)?, a.coord(1)?, a.coord(2)?)),
            "ground" => {
                let x = self.agent.feet.x + a.coord(0)?;
                let z = self.agent.feet.z + a.coord(1)?;
                let top = self.agent.feet.y + 16;
                match self.world.ground_below(x, z, top) {
                    Some(g) => Value::Pos(Pos::new(x, g + 1, z)),
                    None => Value::None,
                }
            }
            "has" => Value::Bool(self.agent.inventory.has(&a.str(0)?, a.count(1)?)),
            "count" => Value::Int(self.agent.inventory.count(&a.str(0)?) as i64),
            "block_at" => Value::Str(self.world.block_at(a.pos(0)?).name().into()),
            "found" => Value::Bool(a.v[0] != Value::None),
            "nearest" => {
                let b = a.block(0)?;
                match self.candidates(b, self.limits.search_radius, 1).first() {
                    Some(p) => Value::Pos(*p),
                    None => Value::None,
                }
            }
            "chat" => {
                self.chat.push(a.v[0].render());
                Value::None
            }
            "equip" => {
                world::equip(self.agent, &a.str(0)?).map_err(|e| werr(sp, e))?;
                Value::None
            }
            "look_at" => {
                let p = a.pos(0)?;
                self.agent.look_at(p.center());
                Value::None
            }
            "move_to" => {
                let p = a.pos(0)?;
                self.go(Goal::Exact(p), sp)?;
                Value::None
            }
            "mine" => {
                let b = a.block(0)?;
                let n = a.count(1)?;
                self.mine(b, n, sp)?;
                Value::None
            }
            "dig" => {
                let p = a.pos(0)?;
                self.dig(p, sp)?;
                Value::None
            }
            "place" => {
                let item = a.str(0)?;
                let p = a.pos(1)?;
                self.place(&item, p, sp)?;
                Value::None
            }
            "craft" => {
                let item = a.str(0)?;
                let n = a.count(1)?;
                if let Some(r) = tables().recipe(&item) {
                    if let Some(station) = r.station.block() {
                        self.approach_station(station)?;
                    }
                }
                world::craft(self.world, self.agent, &item, n).map_err(|e| werr(sp, e))?;
                Value::None
            }
            "smelt" => {
                let item = a.str(0)?;
                let n = a.count(1)?;
                let fuel = a.str(2)?;
                self.approach_station(BlockId::Furnace)?;
                world::smelt(self.world, self.agent, &item, n, &fuel).map_err(|e| werr(sp, e))?;
                Value::None
            }
            "explore" => {
                let dx = a.int(0)?;
                let dz = a.int(1)?;
                let max = a.int(2)?;
                let b = a.block(3)?;
                if !(-1..=1).contains(&dx) || !(-1..=1).contains(&dz) || (dx == 0 && dz == 0) {
                    return Err(halt(
                        sp,
                        "explore direction must be a unit step such as (1, 0) or (1, -1)",
                    ));
                }
                if max < 0 {
                    return Err(halt(sp, "explore distance must not be negative"));
                }
                self.explore(dx as i32, dz as i32, max, b, sp)?
            }
            "pillar_up" => {
                let n = a.int(0)?;
                if n < 0 {
                    return Err(halt(sp, "pillar_up count must not be negative"));
                }
                for _ in 0..n {
                    self.tick(1, sp)?;
                    self.pillar_step(sp)?;
                }
                Value::None
            }
            "use_item" => {
                let item = a.str(0)?;
                let p = a.pos(1)?;
                if !self.agent.inventory.has(&item, 1) {
                    return Err(werr(sp, WorldError::NotInInventory(item)));
                }
                if item != "flint_and_steel" {
                    return Err(halt(sp, format!("{item} cannot be used on blocks")));
                }
                self.go(Goal::Reach(p), sp)?;
                self.agent.look_at(p.center());
                crate::verify::ignite(self.world, p).map_err(|e| werr(sp, e))?;
                Value::None
            }
            other => return Err(halt(sp, format!("unknown function `{other}`"))),
        })
    }

    fn path_limits(&self) -> PathLimits {
        PathLimits {
            node_budget: self.limits.path_node_budget,
            bounds: None,
        }
    }

    fn go(&mut self, goal: Goal, sp: Span) -> R<()> {
        match find_path(self.world, self.agent.feet, goal, &self.path_limits()) {
            Ok(path) => {
                if let Some(end) = path.last() {
                    self.agent.feet = *end;
                }
                Ok(())
            }
            Err(e) => Err(halt(sp, path_message(goal, e))),
        }
    }

    /// Lets the agent drop onto the first solid block below its feet.
    fn settle(&mut self) {
        while self.agent.feet.y > 1 && self.world.block_at(self.agent.feet + Pos::DOWN).is_passable() {
            self.agent.feet.y -= 1;
        }
    }

    fn equip_for(&mut self, b: BlockId) {
        let need = tables().block(b).tier;
        if need == 0 {
            return;
        }
        let best = tables()
            .tools
            .iter()
            .filter(|t| self.agent.inventory.has(&t.name, 1))
            .max_by_key(|t| t.tier);
        if let Some(t) = best {
            if t.tier >= need {
                self.agent.equipment = Some(t.name.clone());
            }
        }
    }

    /// Matching blocks within `radius`, nearest first (ties broken by
    /// position order).
    fn candidates(&self, b: BlockId, radius: i32, limit: usize) -> Vec<Pos> {
        let f = self.agent.feet;
        let mut found: Vec<(i64, Pos)> = Vec::new();
        let y_lo = (f.y - radius).max(0);
        let y_hi = (f.y + radius).min(world::MAX_Y);
        for x in f.x - radius..=f.x + radius {
            for y in y_lo..=y_hi {
                for z in f.z - radius..=f.z + radius {
                    let p = Pos::new(x, y, z);
                    if self.world.block_at(p) == b {
                        found.push((p.dist2(f), p));
                    }
                }
            }
        }
        found.sort();
        found.truncate(limit);
        found.into_iter().map(|(_, p)| p).collect()
    }

    fn mine(&mut self, b: BlockId, n: u32, sp: Span) -> R<()> {
        let entry = tables().block(b);
        if !entry.breakable {
            return Err(werr(sp, WorldError::Unbreakable(b)));
        }
        for _ in 0..n {
            self.tick(1, sp)?;
            let cands = self.candidates(b, self.limits.search_radius, MINE_CANDIDATES);
            if cands.is_empty() {
                return Err(halt(
                    sp,
                    format!("no {} found within {} blocks", b.name(), self.limits.search_radius),
                ));
            }
            let mut target = None;
            for c in &cands {
                if world::in_reach(self.agent, *c) {
                    target = Some(*c);
                    break;
                }
            }
            if target.is_none() {
                for c in &cands {
                    if let Ok(path) = find_path(self.world, self.agent.feet, Goal::Reach(*c), &self.path_limits()) {
                        if let Some(end) = path.last() {
                            self.agent.feet = *end;
                        }
                        target = Some(*c);
                        break;
                    }
                }
            }
            let Some(t) = target else {
                return Err(halt(sp, format!("cannot reach any {} nearby", b.name())));
            };
            self.equip_for(b);
            self.agent.look_at(t.center());
            break_block(self.world, self.agent, t).map_err(|e| werr(sp, e))?;
            self.settle();
        }
        Ok(())
    }

    fn dig(&mut self, p: Pos, sp: Span) -> R<()> {
        let b = self.world.block_at(p);
        if b.is_air() {
            return Err(werr(sp, WorldError::NoBlock(p)));
        }
        if !world::in_reach(self.agent, p) {
            self.go(Goal::Reach(p), sp)?;
        }
        self.equip_for(b);
        self.agent.look_at(p.center());
        break_block(self.world, self.agent, p).map_err(|e| werr(sp, e))?;
        self.settle();
        Ok(())
    }

    fn place(&mut self, item: &str, p: Pos, sp: Span) -> R<()> {
        if !self.agent.inventory.has(item, 1) {
            return Err(werr(sp, WorldError::NotInInventory(item.into())));
        }
        if self.agent.occupies(p) || !world::in_reach(self.agent, p) {
            self.go(Goal::Reach(p), sp)?;
        }
        self.agent.look_at(p.center());
        place_block(self.world, self.agent, p, item).map_err(|e| werr(sp, e))
    }

    fn approach_station(&mut self, station: BlockId) -> R<()> {
        if world::station_within(self.world, self.agent, station, STATION_RANGE).is_some() {
            return Ok(());
        }
        for c in self.candidates(station, self.limits.search_radius, MINE_CANDIDATES) {
            if let Ok(path) = find_path(
                self.world,
                self.agent.feet,
                Goal::Near(c, STATION_RANGE),
                &self.path_limits(),
            ) {
                if let Some(end) = path.last() {
                    self.agent.feet = *end;
                }
                return Ok(());
            }
        }
        // no reachable station: the world operation reports it
        Ok(())
    }

    fn explore(&mut self, dx: i32, dz: i32, max: i64, b: BlockId, sp: Span) -> R<Value> {
        let mut walked = 0;
        loop {
            if let Some(p) = self.candidates(b, EXPLORE_SIGHT, 1).first() {
                return Ok(Value::Pos(*p));
            }
            if walked >= max {
                return Ok(Value::None);
            }
            self.tick(1, sp)?;
            let f = self.agent.feet;
            let next = moves(self.world, f, &self.path_limits())
                .into_iter()
                .find(|n| n.x == f.x + dx && n.z == f.z + dz);
            let next = match next {
                Some(n) => Some(n),
                // diagonal: try the two axis-aligned legs
                None if dx != 0 && dz != 0 => {
                    let via = moves(self.world, f, &self.path_limits())
                        .into_iter()
                        .find(|n| n.x == f.x + dx && n.z == f.z)
                        .or_else(|| {
                            moves(self.world, f, &self.path_limits())
                                .into_iter()
                                .find(|n| n.x == f.x && n.z == f.z + dz)
                        });
                    via.and_then(|v| {
                        moves(self.world, v, &self.path_limits())
                            .into_iter()
                            .find(|n| n.x == f.x + dx && n.z == f.z + dz)
                    })
                }
                None => None,
            };
            match next {
                Some(n) => self.agent.feet = n,
                None => return Ok(Value::None),
            }
            walked += 1;
        }
    }

    fn pillar_step(&mut self, sp: Span) -> R<()> {
        if !self.agent.inventory.has("dirt", 1) {
            return Err(werr(sp, WorldError::NotInInventory("dirt".into())));
        }
        let old = self.agent.feet;
        if !self.world.block_at(old.offset(0, 2, 0)).is_passable() {
            return Err(halt(sp, "no room to jump: the block above the head is solid"));
        }
        if !self.world.block_at(old + Pos::DOWN).is_passable() {
            self.agent.feet = old + Pos::UP;
            match place_block(self.world, self.agent, old, "dirt") {
                Ok(()) => Ok(()),
                Err(e) => {
                    self.agent.feet = old;
                    Err(werr(sp, e))
                }
            }
        } else {
            Err(halt(sp, "cannot pillar up while not standing on a block"))
        }
    }
}

fn path_message(goal: Goal, e: PathError) -> String {
    let what = match goal {
        Goal::Exact(p) => format!("position {p}"),
        Goal::Reach(p) => format!("a spot within reach of {p}"),
        Goal::Near(p, _) => format!("a spot near {p}"),
    };
    match e {
        PathError::NoPath => format!("no path to {what}"),
        PathError::BudgetExhausted => format!("path search to {what} gave up (node budget exhausted)"),
    }
}

fn werr(sp: Span, e: WorldError) -> Halt {
    halt(sp, e.to_string())
}

fn overflow(sp: Span) -> Halt {
    halt(sp, "integer overflow")
}

fn truthy(v: &Value, sp: Span) -> R<bool> {
    match v {
        Value::Bool(b) => Ok(*b),
        other => Err(halt(sp, format!("expected a boolean, got {}", other.type_name()))),
    }
}

fn binary(op: BinOp, l: Value, r: Value, sp: Span) -> R<Value> {
    use Value::*;
    Ok(match (op, l, r) {
        (BinOp::Eq, a, b) => Bool(a == b),
        (BinOp::Ne, a, b) => Bool(a != b),
        (BinOp::Add, Int(a), Int(b)) => Int(a.checked_add(b).ok_or_else(|| overflow(sp))?),
        (BinOp::Sub, Int(a), Int(b)) => Int(a.checked_sub(b).ok_or_else(|| overflow(sp))?),
        (BinOp::Mul, Int(a), Int(b)) => Int(a.checked_mul(b).ok_or_else(|| overflow(sp))?),
        (BinOp::Add, Pos(a), Pos(b)) => Pos(checked_pos(a, b, 1, sp)?),
        (BinOp::Sub, Pos(a), Pos(b)) => Pos(checked_pos(a, b, -1, sp)?),
        (BinOp::Mul, Pos(p), Int(k)) | (BinOp::Mul, Int(k), Pos(p)) => {
            let s = |v: i32| -> R<i32> {
                (v as i64)
                    .checked_mul(k)
                    .and_then(|x| i32::try_from(x).ok())
                    .ok_or_else(|| overflow(sp))
            };
            Pos(crate::geom::Pos::new(s(p.x)?, s(p.y)?, s(p.z)?))
        }
        (BinOp::Lt, Int(a), Int(b)) => Bool(a < b),
        (BinOp::Le, Int(a), Int(b)) => Bool(a <= b),
        (BinOp::Gt, Int(a), Int(b)) => Bool(a > b),
        (BinOp::Ge, Int(a), Int(b)) => Bool(a >= b),
        (op, a, b) => {
            return Err(halt(
                sp,
                format!(
                    "cannot apply `{}` to {} and {}",
                    op.symbol(),
                    a.type_name(),
                    b.type_name()
                ),
            ))
        }
    })
}

fn checked_pos(a: Pos, b: Pos, sign: i32, sp: Span) -> R<Pos> {
    let f = |x: i32, y: i32| x.checked_add(y.checked_mul(sign)?);
    match (f(a.x, b.x), f(a.y, b.y), f(a.z, b.z)) {
        (Some(x), Some(y), Some(z)) => Ok(Pos::new(x, y, z)),
        _ => Err(overflow(sp)),
    }
}

struct Args<'n> {
    v: Vec<Value>,
    span: Span,
    name: &'n str,
}

impl Args<'_> {
    fn bad(&self, i: usize, want: &str) -> Halt {
        halt(
            self.span,
            format!(
                "argument {} of `{}` must be a {want}, got {}",
                i + 1,
                self.name,
                self.v[i].type_name()
            ),
        )
    }

    fn int(&self, i: usize) -> R<i64> {
        match &self.v[i] {
            Value::Int(n) => Ok(*n),
            _ => Err(self.bad(i, "integer")),
        }
    }

    fn coord(&self, i: usize) -> R<i32> {
        let n = self.int(i)?;
        i32::try_from(n).map_err(|_| overflow(self.span))
    }

    fn count(&self, i: usize) -> R<u32> {
        let n = self.int(i)?;
        if n < 1 || n > 64 * 36 {
            return Err(halt(
                self.span,
                format!("count for `{}` must be between 1 and 2304, got {n}", self.name),
            ));
        }
        Ok(n as u32)
    }

    fn str(&self, i: usize) -> R<String> {
        match &self.v[i] {
            Value::Str(s) => Ok(s.clone()),
            _ => Err(self.bad(i, "string")),
        }
    }

    fn pos(&self, i: usize) -> R<Pos> {
        match &self.v[i] {
            Value::Pos(p) => Ok(*p),
            _ => Err(self.bad(i, "position")),
        }
    }

    fn block(&self, i: usize) -> R<BlockId> {
        let s = self.str(i)?;
        BlockId::from_name(&s).ok_or_else(|| halt(self.span, format!("unknown block `{s}`")))
    }
}
