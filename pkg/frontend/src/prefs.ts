// Operator preferences, persisted across reloads.

import type { Descriptiveness, ExperienceLevel } from "./types.js";

export interface OperatorPrefs {
  experience_level: ExperienceLevel;
  descriptiveness: Descriptiveness;
}

const KEY = "sentinel.prefs";
const DEFAULTS: OperatorPrefs = { experience_level: "intermediate", descriptiveness: "concise" };

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function loadPrefs(storage: StorageLike): OperatorPrefs {
  try {
    const raw = storage.getItem(KEY);
    if (!raw) return { ...DEFAULTS };
    const parsed = JSON.parse(raw) as Partial<OperatorPrefs>;
    return {
      experience_level: isLevel(parsed.experience_level) ? parsed.experience_level : DEFAULTS.experience_level,
      descriptiveness: isStyle(parsed.descriptiveness) ? parsed.descriptiveness : DEFAULTS.descriptiveness,
    };
  } catch {
    return { ...DEFAULTS };
  }
}

export function savePrefs(storage: StorageLike, prefs: OperatorPrefs): void {
  storage.setItem(KEY, JSON.stringify(prefs));
}

function isLevel(v: unknown): v is ExperienceLevel {
  return v === "novice" || v === "intermediate" || v === "expert";
}

function isStyle(v: unknown): v is Descriptiveness {
  return v === "concise" || v === "detailed";
}
