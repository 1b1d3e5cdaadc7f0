//! Semantic model built from the AST: import and reference resolution,
//! argument type-checking with physical units, and concreteness.

use std::collections::BTreeMap;

use crate::ast::{AstKind, AstNode};
use crate::diagnostics::Diagnostic;
use crate::units::{Dimension, PhysicalValue};

/// Builtin libraries shipped with the engine. Import names resolve to these
/// unless a user-provided library of the same name shadows them.
pub const BUILTIN_LIBRARIES: &[(&str, &str)] = &[
    ("osc.standard", include_str!("../assets/osc/standard.osc")),
    ("osc.robotics", include_str!("../assets/osc/robotics.osc")),
    ("osc.sim", include_str!("../assets/osc/sim.osc")),
];

pub fn builtin_library_source(name: &str) -> Option<&'static str> {
    BUILTIN_LIBRARIES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| *src)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeKind {
    Struct,
    Actor,
    Action,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamType {
    Physical(Dimension),
    Str,
    Bool,
    Struct(String),
    StrList,
}

impl ParamType {
    fn describe(&self) -> String {
        match self {
            ParamType::Physical(dim) => dim.to_string(),
            ParamType::Str => "string".to_string(),
            ParamType::Bool => "bool".to_string(),
            ParamType::Struct(name) => name.clone(),
            ParamType::StrList => "list of string".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDef {
    pub name: String,
    pub ty: ParamType,
    pub default: Option<Value>,
}

/// A declared composite type: struct, actor or action.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeDef {
    /// Qualified name, e.g. `osc.robotics.nav_to_pose`.
    pub name: String,
    pub kind: TypeKind,
    pub params: Vec<ParamDef>,
    /// Actor type that owns this action (`robot.nav_to_pose` style calls).
    pub owner_actor: Option<String>,
    pub inherits: Option<String>,
}

impl TypeDef {
    pub fn short_name(&self) -> &str {
        self.name.rsplit('.').next().unwrap_or(&self.name)
    }

    pub fn param(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructVal {
    /// Short struct type name, e.g. `pose_3d`.
    pub type_name: String,
    pub fields: BTreeMap<String, Value>,
}

impl StructVal {
    pub fn field(&self, name: &str) -> Option<&Value> {
        self.fields.get(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Physical(PhysicalValue),
    Str(String),
    Bool(bool),
    Struct(StructVal),
    List(Vec<Value>),
    /// Placeholder for a parameter bound by a multi-value `in` constraint.
    Unresolved { call_id: usize, param: String },
}

impl Value {
    pub fn as_physical(&self) -> Option<PhysicalValue> {
        match self {
            Value::Physical(p) => Some(*p),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_struct(&self) -> Option<&StructVal> {
        match self {
            Value::Struct(s) => Some(s),
            _ => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            Value::Physical(p) => p.dimension.to_string(),
            Value::Str(_) => "string".to_string(),
            Value::Bool(_) => "bool".to_string(),
            Value::Struct(s) => s.type_name.clone(),
            Value::List(_) => "list".to_string(),
            Value::Unresolved { .. } => "unresolved".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    In,
}

/// A `keep(it.param == v)` or `keep(it.param in [..])` constraint attached
/// to one action call.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub call_id: usize,
    pub param: String,
    pub relation: Relation,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionCall {
    /// Document-order id, unique within one scenario.
    pub id: usize,
    pub action: TypeDef,
    /// Actor the call is bound to (`robot.nav_to_pose` records "robot").
    pub actor: Option<String>,
    pub args: BTreeMap<String, Value>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BehaviorSpec {
    Serial {
        label: Option<String>,
        children: Vec<BehaviorSpec>,
    },
    Parallel {
        label: Option<String>,
        children: Vec<BehaviorSpec>,
    },
    ActionCall(ActionCall),
    Wait {
        label: Option<String>,
        duration: PhysicalValue,
    },
    Emit {
        label: Option<String>,
        event: String,
    },
}

impl BehaviorSpec {
    pub fn visit_calls<'a>(&'a self, f: &mut impl FnMut(&'a ActionCall)) {
        match self {
            BehaviorSpec::Serial { children, .. } | BehaviorSpec::Parallel { children, .. } => {
                for child in children {
                    child.visit_calls(f);
                }
            }
            BehaviorSpec::ActionCall(call) => f(call),
            _ => {}
        }
    }

    pub fn visit_calls_mut(&mut self, f: &mut impl FnMut(&mut ActionCall)) {
        match self {
            BehaviorSpec::Serial { children, .. } | BehaviorSpec::Parallel { children, .. } => {
                for child in children {
                    child.visit_calls_mut(f);
                }
            }
            BehaviorSpec::ActionCall(call) => f(call),
            _ => {}
        }
    }
}

/// Resolved, typed representation of one scenario declaration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioModel {
    pub name: String,
    pub imports: Vec<String>,
    pub actors: BTreeMap<String, TypeDef>,
    pub behavior: BehaviorSpec,
    pub constraints: Vec<ConstraintSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Concreteness {
    Concrete,
    NotConcrete(Vec<(usize, String)>),
}

/// Symbols visible to one scenario file: every type declared by its imports
/// plus the file's own declarations, keyed by short name.
#[derive(Debug, Default, Clone)]
pub struct SymbolTable {
    types: BTreeMap<String, TypeDef>,
}

impl SymbolTable {
    pub fn lookup(&self, name: &str) -> Option<&TypeDef> {
        self.types
            .get(name)
            .or_else(|| self.types.values().find(|t| t.name == name))
    }

    pub fn action_names(&self) -> impl Iterator<Item = &str> {
        self.types
            .values()
            .filter(|t| t.kind == TypeKind::Action)
            .map(|t| t.name.as_str())
    }
}

/// Build one [`ScenarioModel`] per `scenario` declaration in the file.
///
/// `library_asts` maps import names to already-parsed library files; imports
/// not found there fall back to the builtin libraries.
pub fn build_model(
    file_ast: &AstNode,
    library_asts: &BTreeMap<String, AstNode>,
) -> Result<Vec<ScenarioModel>, Vec<Diagnostic>> {
    let mut builder = ModelBuilder {
        libraries: library_asts,
        symbols: SymbolTable::default(),
        errors: Vec::new(),
        loaded: Vec::new(),
        call_counter: 0,
        constraints: Vec::new(),
    };
    let models = builder.build_file(file_ast);
    if builder.errors.is_empty() {
        Ok(models)
    } else {
        Err(builder.errors)
    }
}

struct ModelBuilder<'a> {
    libraries: &'a BTreeMap<String, AstNode>,
    symbols: SymbolTable,
    errors: Vec<Diagnostic>,
    loaded: Vec<String>,
    call_counter: usize,
    constraints: Vec<ConstraintSet>,
}

impl<'a> ModelBuilder<'a> {
    fn error(&mut self, node: &AstNode, message: impl Into<String>) {
        self.errors.push(Diagnostic::new(node.span.clone(), message));
    }

    fn build_file(&mut self, file_ast: &AstNode) -> Vec<ScenarioModel> {
        let mut imports = Vec::new();
        for import in file_ast.children_of(AstKind::Import) {
            let name = import.attr("name").unwrap_or("").to_string();
            self.load_library(&name, import);
            imports.push(name);
        }
        // the file's own declarations are visible unqualified
        for decl in &file_ast.children {
            match decl.kind {
                AstKind::StructDecl | AstKind::ActorDecl | AstKind::ActionDecl => {
                    self.declare_type(decl, None);
                }
                _ => {}
            }
        }
        let mut models = Vec::new();
        for decl in file_ast.children_of(AstKind::ScenarioDecl) {
            if let Some(model) = self.build_scenario(decl, &imports) {
                models.push(model);
            }
        }
        models
    }

    fn load_library(&mut self, name: &str, at: &AstNode) {
        if self.loaded.iter().any(|n| n == name) {
            return;
        }
        self.loaded.push(name.to_string());
        let parsed_builtin;
        let ast = if let Some(ast) = self.libraries.get(name) {
            ast
        } else if let Some(source) = builtin_library_source(name) {
            let file = format!("<builtin {name}>");
            match crate::lexer::tokenize(source, &file).and_then(|t| crate::parser::parse(&t)) {
                Ok(ast) => {
                    parsed_builtin = ast;
                    &parsed_builtin
                }
                Err(mut errs) => {
                    self.errors.append(&mut errs);
                    return;
                }
            }
        } else {
            self.error(at, format!("unknown import '{name}'"));
            return;
        };
        let ast = ast.clone();
        for import in ast.children_of(AstKind::Import) {
            let nested = import.attr("name").unwrap_or("").to_string();
            self.load_library(&nested, import);
        }
        for decl in &ast.children {
            match decl.kind {
                AstKind::StructDecl | AstKind::ActorDecl | AstKind::ActionDecl => {
                    self.declare_type(decl, Some(name));
                }
                _ => {}
            }
        }
    }

    fn declare_type(&mut self, decl: &AstNode, library: Option<&str>) {
        let raw_name = decl.attr("name").unwrap_or("").to_string();
        let kind = match decl.kind {
            AstKind::StructDecl => TypeKind::Struct,
            AstKind::ActorDecl => TypeKind::Actor,
            _ => TypeKind::Action,
        };
        // `action actor_type.action_name:` binds the action to an actor type
        let (owner_actor, short) = match raw_name.rsplit_once('.') {
            Some((owner, short)) if kind == TypeKind::Action => {
                (Some(owner.to_string()), short.to_string())
            }
            _ => (None, raw_name.clone()),
        };
        let qualified = match library {
            Some(lib) => format!("{lib}.{short}"),
            None => short.clone(),
        };
        let mut params = Vec::new();
        for field in decl.children_of(AstKind::FieldDecl) {
            let pname = field.attr("name").unwrap_or("").to_string();
            if params.iter().any(|p: &ParamDef| p.name == pname) {
                self.error(field, format!("duplicate parameter '{pname}'"));
                continue;
            }
            let ty = match self.resolve_param_type(field) {
                Some(ty) => ty,
                None => continue,
            };
            let default = match field.children.first() {
                Some(expr) => {
                    match evaluate(expr, &BTreeMap::new(), &self.symbols) {
                        Ok(value) => {
                            if let Err(msg) = check_value_type(&value, &ty) {
                                self.error(expr, format!("default value: {msg}"));
                                continue;
                            }
                            Some(value)
                        }
                        Err(err) => {
                            self.errors.push(err);
                            continue;
                        }
                    }
                }
                None => None,
            };
            params.push(ParamDef {
                name: pname,
                ty,
                default,
            });
        }
        let inherits = decl.attr("inherits").map(|s| s.to_string());
        if let Some(existing) = self.symbols.types.get(&short) {
            if existing.name != qualified {
                self.error(
                    decl,
                    format!(
                        "'{short}' is already declared as '{}'",
                        existing.name
                    ),
                );
            }
            return;
        }
        self.symbols.types.insert(
            short,
            TypeDef {
                name: qualified,
                kind,
                params,
                owner_actor,
                inherits,
            },
        );
    }

    fn resolve_param_type(&mut self, field: &AstNode) -> Option<ParamType> {
        let ty = field.attr("type").unwrap_or("");
        match ty {
            "length" => Some(ParamType::Physical(Dimension::Length)),
            "time" => Some(ParamType::Physical(Dimension::Time)),
            "angle" => Some(ParamType::Physical(Dimension::Angle)),
            "float" => Some(ParamType::Physical(Dimension::Dimensionless)),
            "string" => Some(ParamType::Str),
            "bool" => Some(ParamType::Bool),
            "string_list" => Some(ParamType::StrList),
            other => match self.symbols.lookup(other) {
                Some(def) if def.kind == TypeKind::Struct => {
                    Some(ParamType::Struct(def.short_name().to_string()))
                }
                Some(_) => {
                    self.error(field, format!("'{other}' is not a struct type"));
                    None
                }
                None => {
                    self.error(field, format!("unknown type '{other}'"));
                    None
                }
            },
        }
    }

    fn build_scenario(&mut self, decl: &AstNode, imports: &[String]) -> Option<ScenarioModel> {
        let name = decl.attr("name").unwrap_or("").to_string();
        self.call_counter = 0;
        self.constraints = Vec::new();
        let mut actors: BTreeMap<String, TypeDef> = BTreeMap::new();
        for field in decl.children_of(AstKind::FieldDecl) {
            let actor_name = field.attr("name").unwrap_or("").to_string();
            let type_name = field.attr("type").unwrap_or("");
            if actors.contains_key(&actor_name) {
                self.error(field, format!("duplicate actor name '{actor_name}'"));
                continue;
            }
            match self.symbols.lookup(type_name) {
                Some(def) if def.kind == TypeKind::Actor => {
                    actors.insert(actor_name, def.clone());
                }
                Some(_) => {
                    self.error(field, format!("'{type_name}' is not an actor type"));
                }
                None => {
                    self.error(field, format!("unknown actor type '{type_name}'"));
                }
            }
        }
        let errors_before = self.errors.len();
        let behavior = decl
            .children_of(AstKind::DoDirective)
            .next()
            .and_then(|do_dir| do_dir.children.first())
            .map(|comp| self.build_behavior(comp, &actors));
        let behavior = match behavior {
            Some(b) => b,
            None => {
                self.error(decl, format!("scenario '{name}' has no 'do' directive"));
                return None;
            }
        };
        if self.errors.len() > errors_before {
            return None;
        }
        Some(ScenarioModel {
            name,
            imports: imports.to_vec(),
            actors,
            behavior,
            constraints: std::mem::take(&mut self.constraints),
        })
    }

    fn build_behavior(
        &mut self,
        node: &AstNode,
        actors: &BTreeMap<String, TypeDef>,
    ) -> BehaviorSpec {
        let label = node.attr("label").map(|s| s.to_string());
        match node.kind {
            AstKind::Composition => {
                let children = node
                    .children
                    .iter()
                    .map(|child| self.build_behavior(child, actors))
                    .collect();
                if node.attr("operator") == Some("parallel") {
                    BehaviorSpec::Parallel { label, children }
                } else {
                    BehaviorSpec::Serial { label, children }
                }
            }
            AstKind::WaitStatement => {
                let duration = node
                    .children
                    .first()
                    .and_then(|expr| self.fold_wait_duration(expr))
                    .unwrap_or(PhysicalValue::new(0.0, Dimension::Time));
                BehaviorSpec::Wait { label, duration }
            }
            AstKind::EmitStatement => BehaviorSpec::Emit {
                label,
                event: node.attr("name").unwrap_or("").to_string(),
            },
            AstKind::Invocation => self.build_action_call(node, actors, label),
            _ => {
                self.error(node, "unsupported behavior");
                BehaviorSpec::Serial {
                    label,
                    children: Vec::new(),
                }
            }
        }
    }

    /// `wait elapsed(60s)` or `wait 60s`.
    fn fold_wait_duration(&mut self, expr: &AstNode) -> Option<PhysicalValue> {
        let inner = if expr.kind == AstKind::Invocation && expr.attr("name") == Some("elapsed") {
            match expr.children_of(AstKind::NamedArgument).next() {
                Some(arg) => arg.children.first()?,
                None => {
                    self.error(expr, "elapsed() requires a duration argument");
                    return None;
                }
            }
        } else {
            expr
        };
        let value = match evaluate(inner, &BTreeMap::new(), &self.symbols) {
            Ok(v) => v,
            Err(err) => {
                self.errors.push(err);
                return None;
            }
        };
        match value.as_physical() {
            Some(p) if p.dimension == Dimension::Time => Some(p),
            _ => {
                self.error(
                    inner,
                    format!(
                        "type/dimension mismatch: wait expects a time, found {}",
                        value.describe()
                    ),
                );
                None
            }
        }
    }

    fn build_action_call(
        &mut self,
        node: &AstNode,
        actors: &BTreeMap<String, TypeDef>,
        label: Option<String>,
    ) -> BehaviorSpec {
        let call_id = self.call_counter;
        self.call_counter += 1;
        let name = node.attr("name").unwrap_or("").to_string();
        let (actor, action) = self.resolve_action(&name, node, actors);
        let action = match action {
            Some(a) => a,
            None => {
                return BehaviorSpec::ActionCall(ActionCall {
                    id: call_id,
                    action: TypeDef {
                        name,
                        kind: TypeKind::Action,
                        params: Vec::new(),
                        owner_actor: None,
                        inherits: None,
                    },
                    actor,
                    args: BTreeMap::new(),
                    label,
                });
            }
        };
        let arg_nodes: Vec<&AstNode> = node.children_of(AstKind::NamedArgument).collect();
        let mut args = self.bind_arguments(&action, &arg_nodes, node);

        // `with:` keep constraints
        if let Some(with_block) = node.children_of(AstKind::WithBlock).next() {
            for keep in with_block.children_of(AstKind::KeepConstraint) {
                self.apply_constraint(keep, call_id, &action, &mut args);
            }
        }

        // fill defaults, then flag anything still missing
        for param in &action.params {
            if args.contains_key(&param.name) {
                continue;
            }
            match &param.default {
                Some(default) => {
                    args.insert(param.name.clone(), default.clone());
                }
                None => {
                    self.error(
                        node,
                        format!(
                            "missing required argument '{}' of '{}'",
                            param.name,
                            action.short_name()
                        ),
                    );
                }
            }
        }
        BehaviorSpec::ActionCall(ActionCall {
            id: call_id,
            action,
            actor,
            args,
            label,
        })
    }

    fn resolve_action(
        &mut self,
        name: &str,
        node: &AstNode,
        actors: &BTreeMap<String, TypeDef>,
    ) -> (Option<String>, Option<TypeDef>) {
        if let Some((first, rest)) = name.split_once('.') {
            if let Some(actor_type) = actors.get(first) {
                let action = match self.symbols.lookup(rest) {
                    Some(def) if def.kind == TypeKind::Action => def.clone(),
                    Some(_) => {
                        self.error(node, format!("'{rest}' is not an action"));
                        return (Some(first.to_string()), None);
                    }
                    None => {
                        self.error(node, format!("unknown action '{rest}'"));
                        return (Some(first.to_string()), None);
                    }
                };
                if !self.owner_matches(&action, actor_type) {
                    self.error(
                        node,
                        format!(
                            "action '{rest}' is not defined for actor type '{}'",
                            actor_type.short_name()
                        ),
                    );
                }
                return (Some(first.to_string()), Some(action));
            }
        }
        match self.symbols.lookup(name).cloned() {
            Some(def) if def.kind == TypeKind::Action => {
                if let Some(owner) = &def.owner_actor {
                    self.error(
                        node,
                        format!(
                            "action '{name}' must be called on an actor of type '{owner}'"
                        ),
                    );
                }
                (None, Some(def))
            }
            Some(_) => {
                self.error(node, format!("'{name}' is not an action"));
                (None, None)
            }
            None => {
                self.error(node, format!("unknown action '{name}'"));
                (None, None)
            }
        }
    }

    fn owner_matches(&self, action: &TypeDef, actor_type: &TypeDef) -> bool {
        let owner = match &action.owner_actor {
            Some(o) => o,
            None => return true,
        };
        if actor_type.short_name() == owner {
            return true;
        }
        // single-level inherits
        match &actor_type.inherits {
            Some(base) => base == owner,
            None => false,
        }
    }

    fn bind_arguments(
        &mut self,
        action: &TypeDef,
        arg_nodes: &[&AstNode],
        call_node: &AstNode,
    ) -> BTreeMap<String, Value> {
        let mut args = BTreeMap::new();
        let mut positional = 0usize;
        for arg in arg_nodes {
            let param = match arg.attr("name") {
                Some(name) => match action.param(name) {
                    Some(p) => p.clone(),
                    None => {
                        self.error(
                            arg,
                            format!(
                                "unknown named argument '{name}' of '{}'",
                                action.short_name()
                            ),
                        );
                        continue;
                    }
                },
                None => match action.params.get(positional) {
                    Some(p) => {
                        positional += 1;
                        p.clone()
                    }
                    None => {
                        self.error(
                            arg,
                            format!("too many arguments for '{}'", action.short_name()),
                        );
                        continue;
                    }
                },
            };
            let expr = match arg.children.first() {
                Some(e) => e,
                None => continue,
            };
            let value = match evaluate(expr, &BTreeMap::new(), &self.symbols) {
                Ok(v) => v,
                Err(err) => {
                    self.errors.push(err);
                    continue;
                }
            };
            if let Err(msg) = check_value_type(&value, &param.ty) {
                self.error(expr, msg);
                continue;
            }
            if args.insert(param.name.clone(), value).is_some() {
                self.error(arg, format!("argument '{}' given twice", param.name));
            }
        }
        let _ = call_node;
        args
    }

    fn apply_constraint(
        &mut self,
        keep: &AstNode,
        call_id: usize,
        action: &TypeDef,
        args: &mut BTreeMap<String, Value>,
    ) {
        let param_name = keep.attr("name").unwrap_or("").to_string();
        let param = match action.param(&param_name) {
            Some(p) => p.clone(),
            None => {
                self.error(
                    keep,
                    format!(
                        "constraint references unknown parameter '{param_name}' of '{}'",
                        action.short_name()
                    ),
                );
                return;
            }
        };
        let expr = match keep.children.first() {
            Some(e) => e,
            None => return,
        };
        let relation = match keep.attr("relation") {
            Some("in") => Relation::In,
            _ => Relation::Eq,
        };
        match relation {
            Relation::Eq => {
                let value = match evaluate(expr, &BTreeMap::new(), &self.symbols) {
                    Ok(v) => v,
                    Err(err) => {
                        self.errors.push(err);
                        return;
                    }
                };
                if let Err(msg) = check_value_type(&value, &param.ty) {
                    self.error(expr, msg);
                    return;
                }
                args.insert(param_name.clone(), value.clone());
                self.constraints.push(ConstraintSet {
                    call_id,
                    param: param_name,
                    relation,
                    values: vec![value],
                });
            }
            Relation::In => {
                if expr.kind != AstKind::ListLiteral {
                    self.error(expr, "'in' constraint requires a list of values");
                    return;
                }
                if expr.children.is_empty() {
                    self.error(expr, "'in' constraint requires a non-empty list");
                    return;
                }
                let mut values = Vec::new();
                for item in &expr.children {
                    let value = match evaluate(item, &BTreeMap::new(), &self.symbols) {
                        Ok(v) => v,
                        Err(err) => {
                            self.errors.push(err);
                            return;
                        }
                    };
                    if let Err(msg) = check_value_type(&value, &param.ty) {
                        self.error(item, msg);
                        return;
                    }
                    values.push(value);
                }
                if values.len() == 1 {
                    args.insert(param_name.clone(), values[0].clone());
                } else {
                    args.insert(
                        param_name.clone(),
                        Value::Unresolved {
                            call_id,
                            param: param_name.clone(),
                        },
                    );
                }
                self.constraints.push(ConstraintSet {
                    call_id,
                    param: param_name,
                    relation,
                    values,
                });
            }
        }
    }
}

/// Evaluate an expression AST node to a fully-folded [`Value`].
///
/// `env` resolves bare name references; struct invocations fold recursively
/// with declared defaults filled in.
pub fn evaluate(
    expr: &AstNode,
    env: &BTreeMap<String, Value>,
    symbols: &SymbolTable,
) -> Result<Value, Diagnostic> {
    match expr.kind {
        AstKind::Literal => match expr.attr("type") {
            Some("string") => Ok(Value::Str(expr.attr("value").unwrap_or("").to_string())),
            _ => {
                let magnitude: f64 = expr
                    .attr("value")
                    .unwrap_or("0")
                    .parse()
                    .map_err(|_| Diagnostic::new(expr.span.clone(), "invalid number literal"))?;
                match expr.attr("unit") {
                    Some(unit) => PhysicalValue::from_unit(magnitude, unit)
                        .map(Value::Physical)
                        .ok_or_else(|| {
                            Diagnostic::new(expr.span.clone(), format!("unknown unit '{unit}'"))
                        }),
                    None => Ok(Value::Physical(PhysicalValue::dimensionless(magnitude))),
                }
            }
        },
        AstKind::ListLiteral => {
            let mut values = Vec::new();
            for item in &expr.children {
                values.push(evaluate(item, env, symbols)?);
            }
            if let Some(first) = values.first() {
                let d = std::mem::discriminant(first);
                if values.iter().any(|v| std::mem::discriminant(v) != d) {
                    return Err(Diagnostic::new(
                        expr.span.clone(),
                        "list elements must share one type",
                    ));
                }
            }
            Ok(Value::List(values))
        }
        AstKind::Invocation => {
            let name = expr.attr("name").unwrap_or("");
            let def = symbols
                .lookup(name)
                .filter(|d| d.kind == TypeKind::Struct)
                .cloned()
                .ok_or_else(|| {
                    Diagnostic::new(expr.span.clone(), format!("unknown struct type '{name}'"))
                })?;
            let mut fields: BTreeMap<String, Value> = BTreeMap::new();
            let mut positional = 0usize;
            for arg in expr.children_of(AstKind::NamedArgument) {
                let param = match arg.attr("name") {
                    Some(n) => def.param(n).cloned().ok_or_else(|| {
                        Diagnostic::new(
                            arg.span.clone(),
                            format!("unknown field '{n}' of '{}'", def.short_name()),
                        )
                    })?,
                    None => {
                        let p = def.params.get(positional).cloned().ok_or_else(|| {
                            Diagnostic::new(
                                arg.span.clone(),
                                format!("too many fields for '{}'", def.short_name()),
                            )
                        })?;
                        positional += 1;
                        p
                    }
                };
                let inner = arg.children.first().ok_or_else(|| {
                    Diagnostic::new(arg.span.clone(), "missing field value")
                })?;
                let value = evaluate(inner, env, symbols)?;
                check_value_type(&value, &param.ty)
                    .map_err(|msg| Diagnostic::new(inner.span.clone(), msg))?;
                fields.insert(param.name.clone(), value);
            }
            for param in &def.params {
                if !fields.contains_key(&param.name) {
                    match &param.default {
                        Some(default) => {
                            fields.insert(param.name.clone(), default.clone());
                        }
                        None => {
                            return Err(Diagnostic::new(
                                expr.span.clone(),
                                format!(
                                    "missing field '{}' of '{}'",
                                    param.name,
                                    def.short_name()
                                ),
                            ));
                        }
                    }
                }
            }
            Ok(Value::Struct(StructVal {
                type_name: def.short_name().to_string(),
                fields,
            }))
        }
        AstKind::MemberRef => {
            let name = expr.attr("name").unwrap_or("");
            env.get(name).cloned().ok_or_else(|| {
                Diagnostic::new(expr.span.clone(), format!("unbound name '{name}'"))
            })
        }
        _ => Err(Diagnostic::new(expr.span.clone(), "expected an expression")),
    }
}

fn check_value_type(value: &Value, ty: &ParamType) -> Result<(), String> {
    let ok = match (value, ty) {
        (Value::Unresolved { .. }, _) => true,
        (Value::Physical(p), ParamType::Physical(dim)) => p.dimension == *dim,
        (Value::Str(_), ParamType::Str) => true,
        (Value::Bool(_), ParamType::Bool) => true,
        (Value::Struct(s), ParamType::Struct(name)) => &s.type_name == name,
        (Value::List(items), ParamType::StrList) => {
            items.iter().all(|i| matches!(i, Value::Str(_)))
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!(
            "type/dimension mismatch: expected {}, found {}",
            ty.describe(),
            value.describe()
        ))
    }
}

/// Decide whether every action parameter has a single explicit value.
pub fn check_concrete(model: &ScenarioModel) -> Concreteness {
    let mut unresolved = Vec::new();
    model.behavior.visit_calls(&mut |call| {
        for (name, value) in &call.args {
            if matches!(value, Value::Unresolved { .. }) {
                unresolved.push((call.id, name.clone()));
            }
        }
    });
    if unresolved.is_empty() {
        Concreteness::Concrete
    } else {
        Concreteness::NotConcrete(unresolved)
    }
}

/// Render a model back to scenario source text. Used when writing expanded
/// variants to disk; re-parsing the output rebuilds an equivalent model.
pub fn model_to_source(model: &ScenarioModel) -> String {
    let mut out = String::new();
    for import in &model.imports {
        out.push_str(&format!("import {import}\n"));
    }
    out.push_str(&format!("scenario {}:\n", model.name));
    for (name, ty) in &model.actors {
        out.push_str(&format!("    {name}: {}\n", ty.short_name()));
    }
    out.push_str("    do ");
    write_behavior(&model.behavior, model, &mut out, 1, true);
    out
}

fn write_behavior(
    behavior: &BehaviorSpec,
    model: &ScenarioModel,
    out: &mut String,
    indent: usize,
    inline_head: bool,
) {
    let pad = "    ".repeat(indent);
    let head_pad = if inline_head { String::new() } else { pad.clone() };
    match behavior {
        BehaviorSpec::Serial { label, children } | BehaviorSpec::Parallel { label, children } => {
            let op = if matches!(behavior, BehaviorSpec::Parallel { .. }) {
                "parallel"
            } else {
                "serial"
            };
            let label = label.as_ref().map(|l| format!("{l}: ")).unwrap_or_default();
            out.push_str(&format!("{head_pad}{label}{op}:\n"));
            for child in children {
                write_behavior(child, model, out, indent + 1, false);
            }
        }
        BehaviorSpec::Wait { label, duration } => {
            let label = label.as_ref().map(|l| format!("{l}: ")).unwrap_or_default();
            out.push_str(&format!(
                "{head_pad}{label}wait elapsed({})\n",
                format_physical(duration)
            ));
        }
        BehaviorSpec::Emit { label, event } => {
            let label = label.as_ref().map(|l| format!("{l}: ")).unwrap_or_default();
            out.push_str(&format!("{head_pad}{label}emit {event}\n"));
        }
        BehaviorSpec::ActionCall(call) => {
            let label = call
                .label
                .as_ref()
                .map(|l| format!("{l}: "))
                .unwrap_or_default();
            let target = match &call.actor {
                Some(actor) => format!("{actor}.{}", call.action.short_name()),
                None => call.action.short_name().to_string(),
            };
            let mut rendered_args = Vec::new();
            for param in &call.action.params {
                match call.args.get(&param.name) {
                    Some(Value::Unresolved { .. }) | None => {}
                    Some(value) => {
                        rendered_args.push(format!("{}: {}", param.name, format_value(value)));
                    }
                }
            }
            out.push_str(&format!(
                "{head_pad}{label}{target}({})",
                rendered_args.join(", ")
            ));
            // parameters still bound by multi-value constraints keep their lists
            let open: Vec<&ConstraintSet> = model
                .constraints
                .iter()
                .filter(|c| {
                    c.call_id == call.id
                        && c.relation == Relation::In
                        && matches!(call.args.get(&c.param), Some(Value::Unresolved { .. }))
                })
                .collect();
            if open.is_empty() {
                out.push('\n');
            } else {
                out.push_str(" with:\n");
                for c in open {
                    let values: Vec<String> = c.values.iter().map(format_value).collect();
                    out.push_str(&format!(
                        "{pad}    keep(it.{} in [{}])\n",
                        c.param,
                        values.join(", ")
                    ));
                }
            }
        }
    }
}

fn format_physical(p: &PhysicalValue) -> String {
    format!("{}{}", p.magnitude, p.base_unit())
}

fn format_value(value: &Value) -> String {
    match value {
        Value::Physical(p) => format_physical(p),
        Value::Str(s) => format!("'{s}'"),
        Value::Bool(b) => b.to_string(),
        Value::Struct(s) => {
            let fields: Vec<String> = s
                .fields
                .iter()
                .map(|(k, v)| format!("{k}: {}", format_value(v)))
                .collect();
            format!("{}({})", s.type_name, fields.join(", "))
        }
        Value::List(items) => {
            let rendered: Vec<String> = items.iter().map(format_value).collect();
            format!("[{}]", rendered.join(", "))
        }
        Value::Unresolved { param, .. } => format!("<unresolved {param}>"),
    }
}
