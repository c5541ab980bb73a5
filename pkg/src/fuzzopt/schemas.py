"""JSON schemas for CLI inputs."""
import jsonschema

_num = {"type": "number"}

NUMBER = {
    "oneOf": [
        _num,
        {"type": "object", "additionalProperties": False, "required": ["tri"],
         "properties": {"tri": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}}},
        {"type": "object", "additionalProperties": False, "required": ["trap"],
         "properties": {"trap": {"type": "array", "items": _num, "minItems": 4, "maxItems": 4}}},
        {"type": "object", "additionalProperties": False, "required": ["sampled"],
         "properties": {"sampled": {
             "type": "object", "required": ["levels", "cuts"],
             "properties": {
                 "levels": {"type": "array", "items": _num, "minItems": 2},
                 "cuts": {"type": "array", "minItems": 2,
                          "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}},
             }}}},
    ]
}

EXPR = {
    "type": "object",
    "required": ["dim", "terms"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "terms": {"type": "array", "items": {
            "type": "object", "required": ["coef", "exp"], "additionalProperties": False,
            "properties": {
                "coef": NUMBER,
                "exp": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "shift": {"type": "array", "items": _num},
            }}},
        "gh_const": NUMBER,
    },
}

BOX = {
    "type": "object", "required": ["lo", "hi"],
    "properties": {"lo": {"type": "array", "items": _num}, "hi": {"type": "array", "items": _num}},
}

PROBLEM = {
    "type": "object",
    "required": ["objective"],
    "properties": {
        "objective": EXPR,
        "constraints": {"type": "array", "items": EXPR},
        "box": BOX,
    },
}

_vector = {"type": "array", "items": NUMBER, "minItems": 1}

GORDAN = {
    "type": "object",
    "oneOf": [
        {"required": ["vector"], "properties": {"vector": _vector}},
        {"required": ["matrix"], "properties": {"matrix": {"type": "array", "items": _vector, "minItems": 1}}},
    ],
}

DATASET = {
    "type": "object",
    "required": ["points"],
    "properties": {"points": {"type": "array", "minItems": 1, "items": {
        "type": "object", "required": ["coords", "label"],
        "properties": {"coords": _vector, "label": {"enum": [-1, 1]}},
    }}},
}


def validate(instance, schema):
    """Raise ``jsonschema.ValidationError`` for the most relevant failure."""
    errors = list(jsonschema.Draft202012Validator(schema).iter_errors(instance))
    if errors:
        raise jsonschema.exceptions.best_match(errors)
