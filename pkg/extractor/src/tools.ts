import { spawnSync } from 'child_process';

export interface ToolNames {
  nm: string;
  demangler: string;
  frontend: string;
}

export const DEFAULT_TOOLS: ToolNames = {
  nm: 'nm',
  demangler: 'c++filt',
  frontend: 'clang',
};

// AST dumps of real translation units run to tens of megabytes.
const MAX_OUTPUT_BYTES = 1 << 28;

export interface ToolResult {
  status: number;
  stdout: string;
  stderr: string;
}

export const runTool = (
  label: string,
  command: string,
  args: string[],
  input?: string,
): ToolResult => {
  const result = spawnSync(command, args, {
    input,
    encoding: 'utf8',
    maxBuffer: MAX_OUTPUT_BYTES,
  });
  if (result.error) {
    const code = (result.error as NodeJS.ErrnoException).code;
    if (code === 'ENOENT') {
      throw new Error(`${label} not found: ${command}`);
    }
    throw result.error;
  }
  return {
    status: result.status ?? -1,
    stdout: result.stdout ?? '',
    stderr: result.stderr ?? '',
  };
};
