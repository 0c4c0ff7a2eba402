// Word-level diff between original and proposed text, via LCS backtracking.
// Reviewers verify meaning is preserved fastest from change highlights.

export type DiffKind = 'same' | 'add' | 'remove';

export interface DiffSpan {
  kind: DiffKind;
  text: string;
}

const splitWords = (text: string): string[] => text.split(/\s+/).filter(Boolean);

export function diffWords(before: string, after: string): DiffSpan[] {
  const a = splitWords(before);
  const b = splitWords(after);
  const m = a.length;
  const n = b.length;
  if (!m && !n) return [];

  const lcs: number[][] = Array.from({ length: m + 1 }, () => new Array<number>(n + 1).fill(0));
  for (let i = m - 1; i >= 0; i -= 1) {
    for (let j = n - 1; j >= 0; j -= 1) {
      lcs[i][j] = a[i] === b[j] ? lcs[i + 1][j + 1] + 1 : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  const spans: DiffSpan[] = [];
  const push = (kind: DiffKind, text: string) => {
    const last = spans[spans.length - 1];
    if (last && last.kind === kind) {
      last.text += ` ${text}`;
    } else {
      spans.push({ kind, text });
    }
  };

  let i = 0;
  let j = 0;
  while (i < m && j < n) {
    if (a[i] === b[j]) {
      push('same', a[i]);
      i += 1;
      j += 1;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      push('remove', a[i]);
      i += 1;
    } else {
      push('add', b[j]);
      j += 1;
    }
  }
  while (i < m) {
    push('remove', a[i]);
    i += 1;
  }
  while (j < n) {
    push('add', b[j]);
    j += 1;
  }
  return spans;
}
