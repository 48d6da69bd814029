/**
 * Locates and invokes the core CLI. The client never reimplements toolkit
 * behavior; every operation shells out to the `patchmix` executable and
 * exchanges JSON and PNG files with it.
 */

import { execFileSync } from "node:child_process";

export class CliError extends Error {
  constructor(
    message: string,
    readonly exitCode: number,
    readonly stderr: string,
  ) {
    super(message);
  }
}

/** Override with e.g. PATCHMIX_CLI="python3 -m patchmix.cli". */
function cliCommand(): string[] {
  const override = process.env.PATCHMIX_CLI;
  if (override && override.trim()) return override.trim().split(/\s+/);
  return ["patchmix"];
}

const FALLBACK = ["python3", "-m", "patchmix.cli"];

export function runCli(args: string[]): string {
  const attempt = (command: string[]): string =>
    execFileSync(command[0], [...command.slice(1), ...args], {
      encoding: "utf-8",
      maxBuffer: 256 * 1024 * 1024,
    });

  const command = cliCommand();
  try {
    return attempt(command);
  } catch (err: unknown) {
    const e = err as NodeJS.ErrnoException & { status?: number; stderr?: string };
    if (e.code === "ENOENT" && !process.env.PATCHMIX_CLI) {
      try {
        return attempt(FALLBACK);
      } catch (err2: unknown) {
        const e2 = err2 as NodeJS.ErrnoException & { status?: number; stderr?: string };
        throw new CliError(
          `patchmix CLI failed: ${e2.message}`,
          e2.status ?? -1,
          String(e2.stderr ?? ""),
        );
      }
    }
    throw new CliError(
      `patchmix CLI failed: ${e.message}`,
      e.status ?? -1,
      String(e.stderr ?? ""),
    );
  }
}
