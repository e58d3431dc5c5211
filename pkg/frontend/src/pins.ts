import type { PinDocument } from "./types";

/**
 * Pin edits collected from the detail panel but not yet submitted. The
 * service rejects contradictory pins with a 409; this module applies the
 * same conflict rule client-side so a draft can be flagged before a run is
 * ever launched. The rule, restated:
 *
 *   - a unit may be pinned to at most one package,
 *   - a package slot may be pinned to at most one layer,
 *   - layer-only pins (no package target) must all agree on a single layer,
 *     and that layer must equal every pinned package layer, because at
 *     decode time a layer-only unit can land in any package.
 *
 * Patterns here are matched against unit names only. The service also
 * matches origin package names, which the client cannot see; drafts built
 * by the panel always use exact unit names, so nothing is lost.
 */

export interface DraftPin extends PinDocument {
  /** Where the draft came from, for display ("package 3 → layer 1"). */
  label: string;
}

export interface DraftConflict {
  message: string;
  first: DraftPin;
  second: DraftPin;
}

/** fnmatch-style glob: `*`, `?`, `[seq]`, `[!seq]`, case-sensitive. */
export function globToRegExp(pattern: string): RegExp {
  let out = "";
  let i = 0;
  while (i < pattern.length) {
    const c = pattern[i];
    i += 1;
    if (c === "*") {
      out += ".*";
    } else if (c === "?") {
      out += ".";
    } else if (c === "[") {
      let j = i;
      if (j < pattern.length && pattern[j] === "!") j += 1;
      if (j < pattern.length && pattern[j] === "]") j += 1;
      while (j < pattern.length && pattern[j] !== "]") j += 1;
      if (j >= pattern.length) {
        out += "\\[";
      } else {
        let inner = pattern.slice(i, j).replace(/\\/g, "\\\\");
        if (inner.startsWith("!")) inner = "^" + inner.slice(1);
        else if (inner.startsWith("^")) inner = "\\" + inner;
        out += "[" + inner + "]";
        i = j + 1;
      }
    } else {
      out += c.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
    }
  }
  return new RegExp("^" + out + "$", "s");
}

export function matchUnits(pattern: string, unitNames: string[]): number[] {
  const re = globToRegExp(pattern);
  const hits: number[] = [];
  for (let i = 0; i < unitNames.length; i++) {
    if (re.test(unitNames[i])) hits.push(i);
  }
  return hits;
}

/**
 * Returns the first conflict in the draft list, or null when the drafts are
 * consistent and every pattern matches at least one known unit.
 */
export function validateDrafts(
  drafts: DraftPin[],
  unitNames: string[],
): DraftConflict | null {
  const unitPackage = new Map<number, { target: number; src: DraftPin }>();
  const packageLayer = new Map<number, { target: number; src: DraftPin }>();
  const unitLayer = new Map<number, { target: number; src: DraftPin }>();

  const pinPackageLayer = (
    slot: number,
    layer: number,
    src: DraftPin,
  ): DraftConflict | null => {
    const prior = packageLayer.get(slot);
    if (prior && prior.target !== layer) {
      return {
        message: `package ${slot} pinned to layers ${prior.target} and ${layer}`,
        first: prior.src,
        second: src,
      };
    }
    packageLayer.set(slot, { target: layer, src });
    return null;
  };

  for (const draft of drafts) {
    const units = matchUnits(draft.pattern, unitNames);
    if (units.length === 0) {
      return {
        message: `pattern ${JSON.stringify(draft.pattern)} matches no known unit`,
        first: draft,
        second: draft,
      };
    }
    if (draft.package === undefined && draft.layer === undefined) {
      return {
        message: `pin ${JSON.stringify(draft.pattern)} has no package or layer target`,
        first: draft,
        second: draft,
      };
    }
    if (draft.package !== undefined) {
      for (const unit of units) {
        const prior = unitPackage.get(unit);
        if (prior && prior.target !== draft.package) {
          return {
            message:
              `unit ${unitNames[unit]} pinned to packages ` +
              `${prior.target} and ${draft.package}`,
            first: prior.src,
            second: draft,
          };
        }
        unitPackage.set(unit, { target: draft.package, src: draft });
      }
      if (draft.layer !== undefined) {
        const clash = pinPackageLayer(draft.package, draft.layer, draft);
        if (clash) return clash;
      }
    } else if (draft.layer !== undefined) {
      for (const unit of units) {
        const prior = unitLayer.get(unit);
        if (prior && prior.target !== draft.layer) {
          return {
            message:
              `unit ${unitNames[unit]} pinned to layers ` +
              `${prior.target} and ${draft.layer}`,
            first: prior.src,
            second: draft,
          };
        }
        unitLayer.set(unit, { target: draft.layer, src: draft });
      }
    }
  }

  // Layer-only pins can collide with each other or with a package layer pin
  // once decoding places them in the same package.
  const layerPins = [...unitLayer.values()];
  for (const pin of layerPins) {
    if (pin.target !== layerPins[0].target) {
      return {
        message:
          `layer-only pins disagree: layers ${layerPins[0].target} ` +
          `and ${pin.target} could collide in one package`,
        first: layerPins[0].src,
        second: pin.src,
      };
    }
  }
  if (layerPins.length > 0) {
    for (const entry of packageLayer.values()) {
      if (entry.target !== layerPins[0].target) {
        return {
          message:
            `layer-only pin (layer ${layerPins[0].target}) could land in a ` +
            `package pinned to layer ${entry.target}`,
          first: layerPins[0].src,
          second: entry.src,
        };
      }
    }
  }
  return null;
}

/** Strip the display label, leaving the wire form for POST /constrain. */
export function toDocuments(drafts: DraftPin[]): PinDocument[] {
  return drafts.map(({ pattern, package: pkg, layer }) => {
    const doc: PinDocument = { pattern };
    if (pkg !== undefined) doc.package = pkg;
    if (layer !== undefined) doc.layer = layer;
    return doc;
  });
}

/**
 * Drafts that pin every unit of a rendered package into its slot and the
 * slot onto its layer, the "pin this package to its layer" affordance.
 */
export function pinPackageDrafts(
  slot: number,
  layer: number,
  unitNames: string[],
): DraftPin[] {
  const label = `package ${slot} → layer ${layer}`;
  return unitNames.map((name) => ({
    pattern: name,
    package: slot,
    layer,
    label,
  }));
}
