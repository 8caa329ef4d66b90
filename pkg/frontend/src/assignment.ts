/** Assignment draft: the one manual step of the workflow.
 *
 * A contour belongs to at most one group (or to the ignore bin); every edit
 * is undoable. The draft serializes to exactly the payload the service
 * expects, so what is displayed is what gets submitted. */

import type { AssignmentPayload } from "./types.js";

export const IGNORE_GROUP = -1;

interface Edit {
  contourId: number;
  previous: number | null; // group id, IGNORE_GROUP, or null (unassigned)
  next: number | null;
}

export class AssignmentDraft {
  private membership = new Map<number, number>(); // contour -> group or IGNORE_GROUP
  private undoStack: Edit[] = [];
  dirty = false;

  constructor(public transitionLabels: Map<number, string> = new Map()) {}

  groupOf(contourId: number): number | null {
    const g = this.membership.get(contourId);
    return g === undefined ? null : g;
  }

  /** Assign a contour to the active group (or the ignore bin); clicking a
   * contour already in that group takes it back out. */
  assign(contourId: number, activeGroup: number): void {
    const previous = this.groupOf(contourId);
    const next = previous === activeGroup ? null : activeGroup;
    if (next === null) {
      this.membership.delete(contourId);
    } else {
      this.membership.set(contourId, next);
    }
    this.undoStack.push({ contourId, previous, next });
    this.dirty = true;
  }

  undo(): boolean {
    const edit = this.undoStack.pop();
    if (!edit) return false;
    if (edit.previous === null) {
      this.membership.delete(edit.contourId);
    } else {
      this.membership.set(edit.contourId, edit.previous);
    }
    this.dirty = true;
    return true;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  groups(): Map<number, number[]> {
    const out = new Map<number, number[]>();
    const ids = [...this.membership.keys()].sort((a, b) => a - b);
    for (const cid of ids) {
      const g = this.membership.get(cid)!;
      if (g === IGNORE_GROUP) continue;
      if (!out.has(g)) out.set(g, []);
      out.get(g)!.push(cid);
    }
    return out;
  }

  ignored(): number[] {
    return [...this.membership.entries()]
      .filter(([, g]) => g === IGNORE_GROUP)
      .map(([cid]) => cid)
      .sort((a, b) => a - b);
  }

  /** The exact JSON body submitted to PUT /assignment. */
  toPayload(): AssignmentPayload {
    const groups: Record<string, number[]> = {};
    for (const [g, members] of this.groups()) {
      groups[String(g)] = members;
    }
    const transitions: Record<string, string> = {};
    for (const [g, label] of this.transitionLabels) {
      transitions[String(g)] = label;
    }
    return { groups, transitions, ignored: this.ignored() };
  }

  /** One-group-per-contour holds by construction; verify anyway before
   * submission so a violated invariant can never leave the client. */
  validate(): boolean {
    const seen = new Set<number>();
    for (const [, members] of this.groups()) {
      for (const cid of members) {
        if (seen.has(cid)) return false;
        seen.add(cid);
      }
    }
    return this.ignored().every((cid) => !seen.has(cid));
  }
}
