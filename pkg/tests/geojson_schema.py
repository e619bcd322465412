"""Minimal JSON Schema for the GeoJSON subset the tool writes."""

import jsonschema

_POSITION = {"type": "array", "minItems": 2, "maxItems": 3, "items": {"type": "number"}}

GEOMETRY = {
    "oneOf": [
        {"type": "object", "required": ["type", "coordinates"],
         "properties": {"type": {"const": "Point"}, "coordinates": _POSITION}},
        {"type": "object", "required": ["type", "coordinates"],
         "properties": {"type": {"const": "LineString"},
                        "coordinates": {"type": "array", "minItems": 2, "items": _POSITION}}},
        {"type": "object", "required": ["type", "coordinates"],
         "properties": {"type": {"const": "Polygon"},
                        "coordinates": {"type": "array", "items": {"type": "array", "minItems": 4,
                                                                     "items": _POSITION}}}},
    ]
}

FEATURE_COLLECTION = {
    "type": "object",
    "required": ["type", "features"],
    "properties": {
        "type": {"const": "FeatureCollection"},
        "features": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type", "geometry", "properties"],
                "properties": {
                    "type": {"const": "Feature"},
                    "geometry": GEOMETRY,
                    "properties": {"type": "object"},
                },
            },
        },
    },
}


def validate_feature_collection(doc):
    jsonschema.validate(doc, FEATURE_COLLECTION)
