//! The curriculum / action / critic loop.

mod backend;
mod observation;
mod parse;
pub mod prompts;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use backend::{prompt_hash, AgentRole, BackendError, LlmBackend, Message, Part, Role, Script, ScriptedBackend};
pub use observation::{build_observation, labels, template_labels, History, Observation, NEARBY_RADIUS, SEEN_WINDOW};
pub use parse::{parse_proposal, parse_verdict, TaskProposal, Verdict};
pub use prompts::PromptVariant;

use crate::actlang::{self, execute, extract_code, ExecLimits, Program};
use crate::perception::{capture_pov, Image, DEFAULT_HEIGHT, DEFAULT_WIDTH};
use crate::skills::SkillLibrary;
use crate::world::{world_diff, AgentState, VoxelWorld, WorldDiff};

/// Task of the first iteration when the curriculum is active.
pub const FIRST_TASK: &str = "Obtain 1 wooden log";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub max_retries: u32,
    pub skill_top_k: usize,
    /// Scaffolding the curriculum prompt asks for; advice, not enforced.
    pub dirt_scaffold_target: u32,
    pub prompt_variant: PromptVariant,
    /// Attach POV screenshots to agent calls.
    pub screenshots: bool,
    pub image_width: u32,
    pub image_height: u32,
    pub max_steps: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            max_retries: 3,
            skill_top_k: crate::skills::DEFAULT_TOP_K,
            dirt_scaffold_target: 16,
            prompt_variant: PromptVariant::Voyagervision,
            screenshots: true,
            image_width: DEFAULT_WIDTH,
            image_height: DEFAULT_HEIGHT,
            max_steps: ExecLimits::default().max_steps,
        }
    }
}

impl AgentConfig {
    pub fn exec_limits(&self) -> ExecLimits {
        ExecLimits {
            max_steps: self.max_steps,
            ..ExecLimits::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("malformed task proposal: {0}")]
    MalformedProposal(String),
    #[error("no usable code in the reply: {0}")]
    NoCodeFound(String),
    #[error("malformed verdict: {0}")]
    MalformedVerdict(String),
}

/// One model call as it goes into the transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub role: AgentRole,
    /// Action round the call belongs to; 0 for the curriculum.
    pub round: u32,
    /// 0 for the first ask, 1 for the re-ask after a bad reply.
    pub attempt: u32,
    pub prompt_hash: u64,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub program: Option<String>,
    /// Code-generation or execution error, as shown to the next round.
    pub error: Option<String>,
    pub chat_log: Vec<String>,
    pub steps_used: u64,
    pub verdict: Option<Verdict>,
    #[serde(skip)]
    pub pre_image: Option<Image>,
    #[serde(skip)]
    pub post_image: Option<Image>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub task: String,
    pub context: String,
    pub reasoning: String,
    pub rounds: Vec<RoundRecord>,
    pub success: bool,
    pub skill: Option<String>,
    /// Everything the iteration changed in the world.
    pub diff: WorldDiff,
    pub calls: Vec<CallRecord>,
    pub inventory: String,
    #[serde(skip)]
    pub curriculum_image: Option<Image>,
}

/// Borrowed state one loop works on.
pub struct Session<'a, B: LlmBackend + ?Sized> {
    pub world: &'a mut VoxelWorld,
    pub agent: &'a mut AgentState,
    pub config: &'a AgentConfig,
    pub backend: &'a mut B,
    pub skills: &'a mut SkillLibrary,
    pub history: &'a mut History,
}

fn reask_text(problem: &str, what: &str) -> String {
    format!("Your previous response could not be used: {problem}. Respond again with {what}.")
}

struct Caller<'r, B: LlmBackend + ?Sized> {
    backend: &'r mut B,
    calls: &'r mut Vec<CallRecord>,
}

impl<B: LlmBackend + ?Sized> Caller<'_, B> {
    /// Asks, parses, and on a parse failure asks once more with the
    /// problem appended to the conversation.
    fn ask<T>(
        &mut self,
        role: AgentRole,
        round: u32,
        mut messages: Vec<Message>,
        what: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Result<T, String>, BackendError> {
        let mut last = String::new();
        for attempt in 0..2 {
            let reply = self.backend.complete(role, &messages)?;
            self.calls.push(CallRecord {
                role,
                round,
                attempt,
                prompt_hash: prompt_hash(&messages),
                response: reply.clone(),
            });
            match parse(&reply) {
                Ok(v) => return Ok(Ok(v)),
                Err(e) => {
                    messages.push(Message::text(Role::Assistant, reply));
                    messages.push(Message::text(Role::User, reask_text(&e, what)));
                    last = e;
                }
            }
        }
        Ok(Err(last))
    }
}

fn snapshot(config: &AgentConfig, world: &VoxelWorld, agent: &AgentState) -> Option<Image> {
    config
        .screenshots
        .then(|| capture_pov(world, agent, config.image_width, config.image_height))
}

/// Asks the curriculum agent for the next task.
pub fn propose_task<B: LlmBackend + ?Sized>(
    backend: &mut B,
    config: &AgentConfig,
    observation: &Observation,
    image: Option<&Image>,
    calls: &mut Vec<CallRecord>,
) -> Result<TaskProposal, AgentError> {
    let messages = alloc::vec![
        Message::text(
            Role::System,
            prompts::system_prompt(AgentRole::Curriculum, config.prompt_variant, &[])
        ),
        Message::user(observation.render_curriculum(), image),
    ];
    let mut c = Caller { backend, calls };
    c.ask(
        AgentRole::Curriculum,
        0,
        messages,
        "a \"Reasoning:\" line and a \"Task:\" line",
        parse_proposal,
    )?
    .map_err(AgentError::MalformedProposal)
}

/// Asks the action agent for a program and returns its source together
/// with the program linked against the skill library.
pub fn generate_program<B: LlmBackend + ?Sized>(
    backend: &mut B,
    config: &AgentConfig,
    observation: &Observation,
    image: Option<&Image>,
    skills: &SkillLibrary,
    round: u32,
    calls: &mut Vec<CallRecord>,
) -> Result<(String, Program), AgentError> {
    let query = format!("{} {}", observation.task, observation.context);
    let retrieved: Vec<&str> = skills
        .retrieve(query.trim(), config.skill_top_k)
        .into_iter()
        .map(|s| s.source.as_str())
        .collect();
    let messages = alloc::vec![
        Message::text(Role::System, prompts::action_system(config.prompt_variant, &retrieved)),
        Message::user(observation.render_action(), image),
    ];
    let parse = |reply: &str| -> Result<(String, Program), String> {
        let src = extract_code(reply).map_err(|e| format!("{e}"))?;
        let program = actlang::parse(&src).map_err(|e| format!("{e}"))?;
        let linked = skills.link(&program);
        actlang::check(&linked).map_err(|e| format!("{e}"))?;
        Ok((src, linked))
    };
    let mut c = Caller { backend, calls };
    c.ask(
        AgentRole::Action,
        round,
        messages,
        "the complete program in one fenced code block",
        parse,
    )?
    .map_err(AgentError::NoCodeFound)
}

pub fn critique<B: LlmBackend + ?Sized>(
    backend: &mut B,
    config: &AgentConfig,
    observation: &Observation,
    image: Option<&Image>,
    round: u32,
    calls: &mut Vec<CallRecord>,
) -> Result<Verdict, AgentError> {
    let messages = alloc::vec![
        Message::text(
            Role::System,
            prompts::system_prompt(AgentRole::Critic, config.prompt_variant, &[])
        ),
        Message::user(observation.render_critic(), image),
    ];
    let mut c = Caller { backend, calls };
    c.ask(
        AgentRole::Critic,
        round,
        messages,
        "only the JSON object",
        parse_verdict,
    )?
    .map_err(AgentError::MalformedVerdict)
}

impl<B: LlmBackend + ?Sized> Session<'_, B> {
    /// One iteration: take `manual` as the task or ask the curriculum, then
    /// up to `max_retries` rounds of generate → execute → critique.
    ///
    /// Only backend transport failures and a curriculum that cannot produce
    /// a task are returned as errors; everything else is recorded.
    pub fn run_iteration(
        &mut self,
        iteration: u32,
        manual: Option<(&str, &str)>,
    ) -> Result<IterationRecord, AgentError> {
        let config = self.config;
        let before = self.world.clone();
        let mut calls = Vec::new();
        let start_obs = build_observation(self.world, self.agent, self.history);
        let mut curriculum_image = None;
        let proposal = match manual {
            Some((task, context)) => TaskProposal {
                reasoning: String::new(),
                task: task.into(),
                context: context.into(),
            },
            None if iteration <= 1 => TaskProposal {
                reasoning: String::new(),
                task: FIRST_TASK.into(),
                context: String::new(),
            },
            None => {
                curriculum_image = snapshot(config, self.world, self.agent);
                propose_task(self.backend, config, &start_obs, curriculum_image.as_ref(), &mut calls)?
            }
        };
        self.history.remember_nearby(start_obs.nearby_blocks.clone());

        let mut rounds = Vec::new();
        let mut success = false;
        let mut skill = None;
        let mut last_code = None;
        let mut last_error = None;
        let mut chat_log = Vec::new();
        let mut last_critique = String::new();
        for round in 1..=config.max_retries.max(1) {
            let pre_image = snapshot(config, self.world, self.agent);
            let mut obs = build_observation(self.world, self.agent, self.history);
            obs.task = proposal.task.clone();
            obs.context = proposal.context.clone();
            obs.last_code = last_code.clone();
            obs.last_error = last_error.clone();
            obs.chat_log = core::mem::take(&mut chat_log);
            obs.critique = core::mem::take(&mut last_critique);
            let generated = generate_program(
                self.backend,
                config,
                &obs,
                pre_image.as_ref(),
                self.skills,
                round,
                &mut calls,
            );
            let (source, program) = match generated {
                Ok(v) => v,
                Err(AgentError::NoCodeFound(e)) => {
                    last_error = Some(e.clone());
                    rounds.push(RoundRecord {
                        round,
                        program: None,
                        error: Some(e),
                        chat_log: Vec::new(),
                        steps_used: 0,
                        verdict: None,
                        pre_image,
                        post_image: None,
                    });
                    continue;
                }
                Err(e) => return Err(e),
            };
            let result = execute(&program, self.world, self.agent, &config.exec_limits());
            let post_image = snapshot(config, self.world, self.agent);
            let mut after = build_observation(self.world, self.agent, self.history);
            after.task = proposal.task.clone();
            after.context = proposal.context.clone();
            let verdict = match critique(self.backend, config, &after, post_image.as_ref(), round, &mut calls) {
                Ok(v) => Some(v),
                Err(AgentError::MalformedVerdict(_)) => None,
                Err(e) => return Err(e),
            };
            let error = result.error_text();
            rounds.push(RoundRecord {
                round,
                program: Some(source.clone()),
                error: error.clone(),
                chat_log: result.chat_log.clone(),
                steps_used: result.steps_used,
                verdict: verdict.clone(),
                pre_image,
                post_image,
            });
            if verdict.as_ref().is_some_and(|v| v.success) {
                success = true;
                skill = self
                    .skills
                    .add_skill(&proposal.task, &source, iteration)
                    .ok()
                    .map(|s| s.name.clone());
                break;
            }
            last_code = Some(source);
            last_error = error;
            chat_log = result.chat_log;
            last_critique = verdict
                .map(|v| v.critique)
                .unwrap_or_else(|| String::from("The critic's reply could not be parsed."));
        }
        if success {
            self.history.completed.push(proposal.task.clone());
        } else {
            self.history.failed.push(proposal.task.clone());
        }
        let diff = world_diff(&before, self.world).expect("same world");
        Ok(IterationRecord {
            iteration,
            task: proposal.task,
            context: proposal.context,
            reasoning: proposal.reasoning,
            rounds,
            success,
            skill,
            diff,
            calls,
            inventory: self.agent.inventory.render(),
            curriculum_image,
        })
    }
}
