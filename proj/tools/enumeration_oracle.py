#!/usr/bin/env python3
"""Independent enumerator for the script corpora.

Parses data/concepts.txt and data/scripts/*.script with its own minimal
parser and exhaustively enumerates every story each script can produce,
per condition, plus the derived question sets. Prints a JSON report with
counts and SHA-256 digests of the sorted serialized corpora.

The C++ test suite freezes these numbers; regenerate with:
    python3 tools/enumeration_oracle.py [--data data] [--samples N]
"""

import argparse
import hashlib
import itertools
import json
import sys
from pathlib import Path

ROLES = ["agent1", "agent2", "topic", "patientTheme", "recipientDestination",
         "location", "manner", "attribute"]
SLOT_KEYS = {"agent1": 0, "agent2": 1, "patient": 3, "recipient": 4,
             "location": 5, "manner": 6, "attribute": 7}
ROLE_BANK = {0: "agents", 1: "agents", 2: "topics", 3: "patientsThemes",
             4: "recipientsDestinations", 5: "locations", 6: "manners",
             7: "attributes"}


class Concepts:
    def __init__(self, path):
        self.banks = {}
        self.persons = {}
        self.vehicles = []
        self.pronouns = {}
        self.aliases = {}
        bank = None
        for raw in Path(path).read_text().splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "BANK":
                bank = parts[1]
                self.banks[bank] = []
            elif parts[0] == "PERSON":
                bank = None
                self.persons[parts[1]] = {"gender": parts[2], "wealth": parts[3]}
            elif parts[0] == "VEHICLE":
                bank = None
                self.vehicles.append(parts[1])
            elif parts[0] == "PRONOUN":
                bank = None
                self.pronouns[parts[1]] = parts[2]
            elif parts[0] == "ALIAS":
                bank = None
                self.aliases[parts[1]] = parts[2]
            elif bank is not None:
                self.banks[bank].append(line)

    def resolve(self, token):
        return self.aliases.get(token, token)

    def has_property(self, name, prop):
        p = self.persons.get(name)
        return p is not None and prop in (p["gender"], p["wealth"])


class Emit:
    def __init__(self, topic, slots):
        self.topic = topic
        self.slots = slots  # slot index -> spec dict


class OrNode:
    def __init__(self):
        self.branches = []  # (weight, [nodes])


class AndNode:
    def __init__(self, p):
        self.p = p
        self.body = []


class IfNode:
    def __init__(self, var, prop, p):
        self.var, self.prop, self.p = var, prop, p
        self.body = []


class Script:
    def __init__(self, path, concepts):
        self.concepts = concepts
        self.name = None
        self.person_vars = []   # (name, distinct_from or None)
        self.vehicle_vars = []
        self.pick_vars = []     # (name, [refs])
        self.restrict_roles = []
        self.restrict_concepts = []
        self.rule = None        # dict: ant_topic, ant_slot, cons_topic, cons_slot, map
        self.body = []
        self._parse(Path(path).read_text())

    def _slotspec(self, text):
        if text.startswith("{") and text.endswith("}"):
            return {"kind": "choice",
                    "items": [self._slotspec(t) for t in text[1:-1].split("|")]}
        if text.startswith("@pronoun(") and text.endswith(")"):
            return {"kind": "pronoun", "var": text[9:-1]}
        if text.startswith("$"):
            return {"kind": "var", "var": text}
        return {"kind": "lit", "value": self.concepts.resolve(text)}

    def _parse_emit(self, parts):
        topic = parts[1]
        slots = {}
        for item in parts[2:]:
            key, _, val = item.partition("=")
            slots[SLOT_KEYS[key]] = self._slotspec(val)
        return Emit(topic, slots)

    def _parse(self, text):
        lines = [l for l in text.splitlines() if l.strip() and not l.strip().startswith("#")]
        section = None
        body_lines = []
        for raw in lines:
            stripped = raw.strip()
            head = stripped.split()[0]
            if section != "BODY" and head in ("SCRIPT", "VARS", "RESTRICT", "RULE", "BODY"):
                section = head
                if head == "SCRIPT":
                    self.name = stripped.split()[1]
                elif head == "RESTRICT":
                    parts = stripped.split()
                    i = parts.index("never")
                    self.restrict_roles = parts[2:i]
                    self.restrict_concepts = parts[i + 1:]
                elif head == "RULE":
                    ant, cons = stripped[len("RULE"):].split("->")
                    at, asl = ant.strip().split(".")
                    ct, csl = cons.strip().split(".")
                    self.rule = {"ant_topic": at, "ant_slot": SLOT_KEYS.get(asl, 7),
                                 "cons_topic": ct, "cons_slot": SLOT_KEYS.get(csl, 7),
                                 "map": {}}
                continue
            if section == "VARS":
                parts = stripped.split()
                if parts[0] == "person":
                    distinct = parts[3] if len(parts) > 2 and parts[2] == "!=" else None
                    self.person_vars.append((parts[1], distinct))
                elif parts[0] == "vehicle":
                    self.vehicle_vars.append(parts[1])
                elif parts[0] == "pick":
                    self.pick_vars.append((parts[1], parts[3:]))
            elif section == "RULE":
                a, b = (t.strip() for t in stripped.split("->"))
                self.rule["map"][self.concepts.resolve(a)] = self.concepts.resolve(b)
            elif section == "BODY":
                body_lines.append(raw)
        self.body = self._parse_body(body_lines)

    def _parse_body(self, lines):
        def indent(l):
            return (len(l) - len(l.lstrip())) // 2

        def parse_seq(i, depth):
            nodes = []
            while i < len(lines):
                d = indent(lines[i])
                if d < depth:
                    break
                if d > depth:
                    raise ValueError(f"bad indent: {lines[i]!r}")
                parts = lines[i].split()
                if parts[0] == "EMIT":
                    nodes.append(self._parse_emit(parts))
                    i += 1
                elif parts[0] == "AND":
                    node = AndNode(float(parts[1]))
                    node.body, i = parse_seq(i + 1, depth + 1)
                    nodes.append(node)
                elif parts[0] == "IF":
                    node = IfNode(parts[1], parts[3], float(parts[4]))
                    node.body, i = parse_seq(i + 1, depth + 1)
                    nodes.append(node)
                elif parts[0] == "OR":
                    node = OrNode()
                    i += 1
                    total = 0.0
                    while i < len(lines) and indent(lines[i]) == depth + 1 \
                            and lines[i].strip().endswith(":"):
                        w = float(lines[i].strip()[:-1])
                        total += w
                        body, i = parse_seq(i + 1, depth + 2)
                        node.branches.append((w, body))
                    assert abs(total - 1.0) < 1e-9, f"OR weights sum {total}"
                    nodes.append(node)
                else:
                    raise ValueError(f"unknown node: {lines[i]!r}")
            return nodes, i

        nodes, i = parse_seq(0, 0)
        assert i == len(lines)
        return nodes

    # enumeration -------------------------------------------------------

    def bindings(self, condition):
        persons = list(self.concepts.persons)
        vehicles = list(self.concepts.vehicles)
        rc = set(self.restrict_concepts)
        person_dom = persons
        vehicle_dom = vehicles
        if condition == "restricted":
            person_dom = [p for p in persons if p not in rc]
            vehicle_dom = [v for v in vehicles if v not in rc]
        elif condition == "violation":
            if any(c in self.concepts.persons for c in rc):
                person_dom = [p for p in persons if p in rc]
            if any(c in self.concepts.vehicles for c in rc):
                vehicle_dom = [v for v in vehicles if v in rc]
        out = []
        pvars = self.person_vars
        for combo in itertools.product(person_dom, repeat=len(pvars)):
            base = {name.lstrip("$"): val for (name, _), val in zip(pvars, combo)}
            if any(d is not None and base[n.lstrip("$")] == base[d.lstrip("$")]
                   for n, d in pvars):
                continue
            for veh in (vehicle_dom if self.vehicle_vars else [None]):
                b = dict(base)
                for vname in self.vehicle_vars:
                    b[vname.lstrip("$")] = veh
                for pname, refs in self.pick_vars:
                    for choice in refs:
                        bb = dict(b)
                        bb[pname.lstrip("$")] = b[choice.lstrip("$")]
                        out.append(bb)
                if not self.pick_vars:
                    out.append(b)
        return out

    def _resolve(self, spec, binding, story):
        if spec["kind"] == "lit":
            return [spec["value"]]
        if spec["kind"] == "var":
            return [binding[spec["var"].lstrip("$")]]
        if spec["kind"] == "pronoun":
            person = binding[spec["var"].lstrip("$")]
            return [self.concepts.pronouns[self.concepts.persons[person]["gender"]]]
        return None  # choice handled by caller

    def _expand_emit(self, emit, binding, story):
        forced = None
        if self.rule and emit.topic == self.rule["cons_topic"]:
            ant = next((p for p in story if p[2] == self.rule["ant_topic"]), None)
            assert ant is not None, f"{self.name}: consequent before antecedent"
            forced = self.rule["map"][ant[self.rule["ant_slot"]]]
        slot_options = []
        for idx in range(8):
            if idx == 2:
                slot_options.append([emit.topic])
                continue
            spec = emit.slots.get(idx)
            if spec is None:
                slot_options.append(["NONE"])
            elif spec["kind"] == "choice":
                if forced is not None and self.rule["cons_slot"] == idx:
                    slot_options.append([forced])
                else:
                    opts = []
                    for item in spec["items"]:
                        opts.extend(self._resolve(item, binding, story))
                    slot_options.append(opts)
            else:
                vals = self._resolve(spec, binding, story)
                if forced is not None and self.rule["cons_slot"] == idx:
                    assert vals == [forced], f"{self.name}: rule broken"
                slot_options.append(vals)
        return [tuple(combo) for combo in itertools.product(*slot_options)]

    def _expand_seq(self, nodes, binding, stories):
        for node in nodes:
            if isinstance(node, Emit):
                stories = [s + [p] for s in stories
                           for p in self._expand_emit(node, binding, s)]
            elif isinstance(node, OrNode):
                out = []
                for _, body in node.branches:
                    out.extend(self._expand_seq(body, binding, stories))
                stories = out
            elif isinstance(node, AndNode):
                out = []
                if node.p < 1.0:
                    out.extend(stories)
                if node.p > 0.0:
                    out.extend(self._expand_seq(node.body, binding, stories))
                stories = out
            elif isinstance(node, IfNode):
                if self.concepts.has_property(binding[node.var.lstrip("$")], node.prop):
                    out = []
                    if node.p < 1.0:
                        out.extend(stories)
                    if node.p > 0.0:
                        out.extend(self._expand_seq(node.body, binding, stories))
                    stories = out
        return stories

    def enumerate(self, condition):
        stories = []
        for binding in self.bindings(condition):
            stories.extend(self._expand_seq(self.body, binding, [[]]))
        for s in stories:
            self.validate(s, condition)
        return stories

    def validate(self, story, condition):
        topics = [p[2] for p in story]
        assert len(set(topics)) == len(topics), f"{self.name}: repeated topic"
        for p in story:
            for idx, val in enumerate(p):
                if val == "NONE":
                    assert idx != 2
                    continue
                assert val in self.concepts.banks[ROLE_BANK[idx]], \
                    f"{self.name}: {val} not in {ROLE_BANK[idx]}"
        if self.rule:
            ant = next((p for p in story if p[2] == self.rule["ant_topic"]), None)
            cons = next((p for p in story if p[2] == self.rule["cons_topic"]), None)
            assert ant and cons
            assert self.rule["map"][ant[self.rule["ant_slot"]]] == cons[self.rule["cons_slot"]]
        if condition == "restricted":
            for p in story:
                for val in p:
                    assert val not in self.restrict_concepts


def serialize(name, story):
    return name + "|" + "|".join(",".join(p) for p in story)


def digest(lines):
    h = hashlib.sha256()
    for line in sorted(lines):
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data", default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--samples", type=int, default=0,
                    help="print N sample stories per script")
    args = ap.parse_args()
    data = Path(args.data)

    concepts = Concepts(data / "concepts.txt")
    report = {"scripts": {}, "totals": {}}
    union = {"unrestricted": [], "restricted": [], "violation": [],
             "baseline_items": [], "violation_items": [], "correlation_items": []}

    for path in sorted((data / "scripts").glob("*.script")):
        sc = Script(path, concepts)
        entry = {}
        stories = {}
        for cond in ("unrestricted", "restricted", "violation"):
            st = sc.enumerate(cond)
            stories[cond] = st
            lines = [serialize(sc.name, s) for s in st]
            assert len(set(lines)) == len(lines), f"{sc.name}: duplicate stories"
            union[cond].extend(lines)
            entry[cond] = {"stories": len(st),
                           "propositions": sum(len(s) for s in st),
                           "sha256": digest(lines)}

        base_items = [serialize(sc.name, s) + "||" + p[2] + "||" + ",".join(p)
                      for s in stories["unrestricted"] for p in s]
        union["baseline_items"].extend(base_items)
        entry["baseline_items"] = len(base_items)

        rc = set(sc.restrict_concepts)
        viol_items = [serialize(sc.name, s) + "||" + p[2] + "||" + ",".join(p)
                      for s in stories["violation"] for p in s
                      if any(v in rc for v in p)]
        union["violation_items"].extend(viol_items)
        entry["violation_items"] = len(viol_items)

        rule = sc.rule
        corr_items = []
        for s in stories["unrestricted"]:
            flipped = []
            for p in s:
                if p[2] == rule["cons_topic"]:
                    q = list(p)
                    q[rule["cons_slot"]] = next(v for v in rule["map"].values()
                                                if v != q[rule["cons_slot"]])
                    flipped.append(tuple(q))
                else:
                    flipped.append(p)
            corr_items.append(serialize(sc.name, flipped) + "||" + rule["cons_topic"]
                              + "||" + ",".join(next(p for p in flipped
                                                     if p[2] == rule["cons_topic"])))
        union["correlation_items"].extend(corr_items)
        entry["correlation_items"] = len(corr_items)
        entry["probe_items"] = len(stories["unrestricted"])

        if args.samples:
            entry["samples"] = [serialize(sc.name, s)
                                for s in stories["unrestricted"][:args.samples]]
        report["scripts"][sc.name] = entry

    for key, lines in union.items():
        report["totals"][key] = {"count": len(lines), "sha256": digest(lines)}
    json.dump(report, sys.stdout, indent=2)
    print()


if __name__ == "__main__":
    main()
