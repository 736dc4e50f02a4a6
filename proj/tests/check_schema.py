import json
import sys

import jsonschema

schema = json.load(open(sys.argv[1]))
jsonschema.Draft202012Validator.check_schema(schema)
for path in sys.argv[2:]:
    jsonschema.validate(json.load(open(path)), schema)
    print("ok", path)
# The zero-a example must be rejected.
bad = {"potential": {"kind": "free"}, "grid": {"x_min": 0, "x_max": 1},
       "microstates": [{"E": 0.5, "a": 0}]}
try:
    jsonschema.validate(bad, schema)
except jsonschema.ValidationError:
    print("ok rejects a = 0")
else:
    sys.exit("schema accepted a = 0")
