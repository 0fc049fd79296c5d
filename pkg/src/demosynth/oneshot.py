"""Repo-stored golden pair for one-shot prompting, plus the mock client's
canned fallback. Versioned together with the textualization format: the
test suite regenerates EXAMPLE_INPUT from the counter fixture and fails on
drift, so prompt-format changes cannot slip through silently."""

SYSTEM_TEXT = """\
You synthesize stateful React components from UI demonstrations.
The input shows a UI sketch whose reactive slots are state variables
(s1, s2, ...), the initial state, and demo timelines listing each event
with the state before and after it. Holes like $1 name the event handlers
to implement. Write a component that reproduces every demonstrated
transition exactly; introduce extra state variables if the transitions
cannot be explained by the visible state alone.
Reply with exactly one fenced code block containing a single function
component that uses useState hooks. No explanation outside the block.\
"""

EXAMPLE_INPUT = """\
SKETCH:
<div>
  <span>{s1}</span>
  <button onClick={$1}>+</button>
</div>

INITIAL STATE:
s1 = 0

TIMELINE counter-a:
step 1: CLICK $1 ; before {s1: 0} ; after {s1: 1}
step 2: CLICK $1 ; before {s1: 1} ; after {s1: 2}

TIMELINE counter-b:
step 1: CLICK $1 ; before {s1: 0} ; after {s1: 1}
step 2: CLICK $1 ; before {s1: 1} ; after {s1: 2}
"""

EXAMPLE_OUTPUT = """\
```jsx
function Counter() {
  const [s1, setS1] = useState(0);
  const h1 = () => {
    setS1(s1 + 1);
  };
  return (
    <div>
      <span>{s1}</span>
      <button onClick={h1}>+</button>
    </div>
  );
}
```\
"""

# Fallback for the deterministic mock: a counter whose button alternates
# between +1 and +2, which needs a hidden mode variable.
CANNED_LATENT_RESPONSE = """\
```jsx
function Counter() {
  const [s1, setS1] = useState(0);
  const [mode, setMode] = useState(1);
  const h1 = () => {
    setS1(s1 + mode);
    setMode(3 - mode);
  };
  return (
    <div>
      <span>{s1}</span>
      <button onClick={h1}>+</button>
    </div>
  );
}
```\
"""
