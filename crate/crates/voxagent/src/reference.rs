//! Reference programs and the scripted backends built from them. The `.act`
//! files under `scripts/programs` are the source of truth; the JSON scripts
//! under `scripts/` are generated from them (see the `shipped_scripts` test).

use std::collections::BTreeMap;

use voxagent_core::agents::{AgentRole, Script};
use voxagent_core::verify::Template;
use voxagent_core::world::WorldKind;

use crate::backend::{ScriptFile, ScriptSuite};

/// Source of the reference program for `t` on a world of `kind`. Regular
/// worlds get a variant that levels the footprint first.
pub fn program(t: Template, kind: WorldKind) -> &'static str {
    use Template::*;
    use WorldKind::*;
    match (t, kind) {
        (Pole, Flat) => include_str!("../scripts/programs/pole_flat.act"),
        (Pole, Regular) => include_str!("../scripts/programs/pole_regular.act"),
        (Wall, Flat) => include_str!("../scripts/programs/wall_flat.act"),
        (Wall, Regular) => include_str!("../scripts/programs/wall_regular.act"),
        (Stairs, Flat) => include_str!("../scripts/programs/stairs_flat.act"),
        (Stairs, Regular) => include_str!("../scripts/programs/stairs_regular.act"),
        (Portal, Flat) => include_str!("../scripts/programs/portal_flat.act"),
        (Portal, Regular) => include_str!("../scripts/programs/portal_regular.act"),
        (Pyramid, Flat) => include_str!("../scripts/programs/pyramid_flat.act"),
        (Pyramid, Regular) => include_str!("../scripts/programs/pyramid_regular.act"),
    }
}

pub const ADVERSARIAL_POLE: &str = include_str!("../scripts/programs/adversarial_pole.act");

/// The manual (task, context) pair for each unit test. An empty context
/// stands for "no additional context".
pub fn unit_task(t: Template) -> (&'static str, &'static str) {
    match t {
        Template::Pole => ("Create a wooden plank pole, 3 blocks high on the ground.", ""),
        Template::Wall => ("Create a wooden wall 4 blocks high and 4 blocks long in a flat open space.", ""),
        Template::Stairs => (
            "create a wooden staircase 3 blocks high.",
            "The stair case should be composed of 3 adjacent pillars, one 3 blocks high, one 2 blocks high and one 1 block high, use wooden planks.",
        ),
        Template::Portal => (
            "create a nether portal.",
            "The portal should be made of obsidian, the sides should be 5 blocks tall with the base 4 blocks wide, once you have completed the structure light the inside with your flint and steel to form a nether portal, ensure no dirt scaffolding remains inside the portal or else it will not light correctly.",
        ),
        Template::Pyramid => (
            "create a three tier spruce plank pyramid.",
            "Begin with a 6x6 platform on the ground, on top of this platform centred on its middle 4x4 blocks add a 4x4 platform, finally on top of this 4x4 platform in its middle 2x2 blocks add 2x2 platform.",
        ),
    }
}

/// Items handed to the agent before a unit test.
pub fn provisioned_inventory(t: Template) -> &'static [(&'static str, u32)] {
    match t {
        Template::Pole | Template::Wall | Template::Stairs => &[("oak_planks", 64), ("dirt", 64)],
        Template::Pyramid => &[("spruce_planks", 64), ("dirt", 64)],
        Template::Portal => &[("obsidian", 14), ("flint_and_steel", 1), ("dirt", 64)],
    }
}

/// The iteration-1 task of the open-ended loop comes from the agent loop
/// itself; these are the curriculum answers for iterations 2 onwards,
/// paired with the program for each iteration.
pub const RESOURCE_PLAN: [(&str, &str); 9] = [
    ("", include_str!("../scripts/programs/resources/1_log.act")),
    (
        "Mine 3 oak logs",
        include_str!("../scripts/programs/resources/2_more_logs.act"),
    ),
    (
        "Craft a wooden pickaxe",
        include_str!("../scripts/programs/resources/3_wooden_pickaxe.act"),
    ),
    (
        "Mine 3 cobblestone",
        include_str!("../scripts/programs/resources/4_cobblestone.act"),
    ),
    (
        "Craft a stone pickaxe",
        include_str!("../scripts/programs/resources/5_stone_pickaxe.act"),
    ),
    (
        "Mine 3 iron ore",
        include_str!("../scripts/programs/resources/6_iron_ore.act"),
    ),
    (
        "Craft a furnace",
        include_str!("../scripts/programs/resources/7_furnace.act"),
    ),
    (
        "Smelt 3 raw iron",
        include_str!("../scripts/programs/resources/8_smelt.act"),
    ),
    (
        "Craft an iron pickaxe",
        include_str!("../scripts/programs/resources/9_iron_pickaxe.act"),
    ),
];

/// Regular-world seed the resource plan was worked out on.
pub const RESOURCE_SEED: u64 = 10;
/// Iterations at which the plan first holds a wooden, stone and iron pickaxe.
pub const RESOURCE_MILESTONES: [u32; 3] = [3, 5, 9];

const BUILD_POLE: &str = include_str!("../scripts/programs/building/pole.act");

pub const BUILDING_PLAN: [(&str, &str); 7] = [
    ("", include_str!("../scripts/programs/building/1_log.act")),
    (
        "Mine 5 oak logs",
        include_str!("../scripts/programs/building/2_logs.act"),
    ),
    (
        "Craft 24 oak planks",
        include_str!("../scripts/programs/building/3_planks.act"),
    ),
    (
        "Gather 16 dirt",
        include_str!("../scripts/programs/building/4_dirt.act"),
    ),
    ("Build a wooden plank pole", BUILD_POLE),
    (
        "Build a wooden wall 4 blocks high and 4 blocks long",
        include_str!("../scripts/programs/building/wall.act"),
    ),
    ("Build a wooden plank pole", BUILD_POLE),
];

/// Seed the building plan was checked on (both world kinds).
pub const BUILDING_SEED: u64 = 1;

pub const CRITIC_YES: &str =
    r#"{"reasoning": "The screenshot and inventory show the task is complete.", "success": true, "critique": ""}"#;

pub fn action_reply(src: &str) -> String {
    format!(
        "Explain: No errors so far.\nPlan:\n1) Run the program below.\nCode:\n```\n{}\n```\n",
        src.trim_end()
    )
}

pub fn curriculum_reply(task: &str) -> String {
    format!("Reasoning: This is the next step towards better tools and structures.\nTask: {task}\n")
}

fn always(name: &str, program: &str) -> Script {
    Script {
        name: name.to_owned(),
        responses: BTreeMap::new(),
        defaults: BTreeMap::new(),
    }
    .with_default(AgentRole::Action, action_reply(program))
    .with_default(AgentRole::Critic, CRITIC_YES)
}

/// Reference programs for every unit test; the critic always agrees.
pub fn unit_test_suite() -> ScriptFile {
    let mut scripts = BTreeMap::new();
    for t in Template::ALL {
        for kind in [WorldKind::Flat, WorldKind::Regular] {
            let key = format!("{}.{}", t.name(), kind.name());
            scripts.insert(key.clone(), always(&key, program(t, kind)));
        }
    }
    ScriptFile::Suite(ScriptSuite {
        name: "reference".into(),
        scripts,
    })
}

/// Builds a pole one block short and a critic that approves anything.
pub fn adversarial_suite() -> ScriptFile {
    let mut scripts = BTreeMap::new();
    scripts.insert("*".to_owned(), always("short-pole", ADVERSARIAL_POLE));
    ScriptFile::Suite(ScriptSuite {
        name: "adversarial".into(),
        scripts,
    })
}

fn plan_script(name: &str, plan: &[(&str, &str)]) -> ScriptFile {
    let mut s = Script {
        name: name.to_owned(),
        ..Script::default()
    }
    .with_default(AgentRole::Critic, CRITIC_YES);
    for (i, (task, src)) in plan.iter().enumerate() {
        if i > 0 {
            s.push(AgentRole::Curriculum, curriculum_reply(task));
        }
        s.push(AgentRole::Action, action_reply(src));
    }
    ScriptFile::Single(s)
}

pub fn resource_script() -> ScriptFile {
    plan_script("resources-plan", &RESOURCE_PLAN)
}

pub fn building_script() -> ScriptFile {
    plan_script("building-plan", &BUILDING_PLAN)
}

/// File name under `scripts/` and contents of every shipped script.
pub fn shipped_scripts() -> Vec<(&'static str, ScriptFile)> {
    vec![
        ("unit_tests_reference.json", unit_test_suite()),
        ("unit_tests_adversarial.json", adversarial_suite()),
        ("resources_plan.json", resource_script()),
        ("building_plan.json", building_script()),
    ]
}
