import { describe, expect, it } from "vitest";

import { AssignmentDraft, IGNORE_GROUP } from "../src/assignment.js";

describe("AssignmentDraft", () => {
  it("assigns a clicked contour to the active group", () => {
    const d = new AssignmentDraft();
    d.assign(4, 1);
    expect(d.groupOf(4)).toBe(1);
    expect(d.toPayload().groups).toEqual({ "1": [4] });
  });

  it("clicking with ignore active removes from all groups", () => {
    const d = new AssignmentDraft();
    d.assign(4, 1);
    d.assign(4, IGNORE_GROUP);
    expect(d.toPayload().groups).toEqual({});
    expect(d.toPayload().ignored).toEqual([4]);
  });

  it("clicking a contour already in the active group unassigns it", () => {
    const d = new AssignmentDraft();
    d.assign(7, 2);
    d.assign(7, 2);
    expect(d.groupOf(7)).toBeNull();
  });

  it("moving a contour between groups keeps one-group-per-contour", () => {
    const d = new AssignmentDraft();
    d.assign(3, 0);
    d.assign(3, 2);
    expect(d.groupOf(3)).toBe(2);
    expect(d.toPayload().groups).toEqual({ "2": [3] });
    expect(d.validate()).toBe(true);
  });

  it("undo restores the previous group", () => {
    const d = new AssignmentDraft();
    d.assign(5, 0);
    d.assign(5, 1);
    expect(d.groupOf(5)).toBe(1);
    expect(d.undo()).toBe(true);
    expect(d.groupOf(5)).toBe(0);
    expect(d.undo()).toBe(true);
    expect(d.groupOf(5)).toBeNull();
    expect(d.undo()).toBe(false);
  });

  it("reproduces the example grouping {0,1},{4,5},{2,3} in six clicks", () => {
    const d = new AssignmentDraft(
      new Map([[0, "w10"], [1, "w20"], [2, "w31"]]),
    );
    d.assign(0, 0);
    d.assign(1, 0);
    d.assign(4, 1);
    d.assign(5, 1);
    d.assign(2, 2);
    d.assign(3, 2);
    expect(d.undoDepth).toBe(6);
    expect(d.toPayload()).toEqual({
      groups: { "0": [0, 1], "1": [4, 5], "2": [2, 3] },
      transitions: { "0": "w10", "1": "w20", "2": "w31" },
      ignored: [],
    });
    expect(d.validate()).toBe(true);
  });
});
