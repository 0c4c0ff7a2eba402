import { describe, expect, it } from 'vitest';

import { diffWords } from '../src/diff.js';

describe('diffWords', () => {
  it('marks identical text as one same-span', () => {
    expect(diffWords('change the password', 'change the password')).toEqual([
      { kind: 'same', text: 'change the password' },
    ]);
  });

  it('highlights substitutions as remove+add', () => {
    const spans = diffWords('lock the door', 'lock the window');
    expect(spans).toEqual([
      { kind: 'same', text: 'lock the' },
      { kind: 'remove', text: 'door' },
      { kind: 'add', text: 'window' },
    ]);
  });

  it('handles pure insertion and deletion', () => {
    expect(diffWords('secure hub', 'secure the hub')).toEqual([
      { kind: 'same', text: 'secure' },
      { kind: 'add', text: 'the' },
      { kind: 'same', text: 'hub' },
    ]);
    expect(diffWords('secure the hub', 'secure hub')).toEqual([
      { kind: 'same', text: 'secure' },
      { kind: 'remove', text: 'the' },
      { kind: 'same', text: 'hub' },
    ]);
  });

  it('handles empty sides', () => {
    expect(diffWords('', '')).toEqual([]);
    expect(diffWords('', 'all new')).toEqual([{ kind: 'add', text: 'all new' }]);
    expect(diffWords('all gone', '')).toEqual([{ kind: 'remove', text: 'all gone' }]);
  });

  it('reconstructs both sides from the spans', () => {
    const before = 'the quick brown fox jumps over the lazy dog';
    const after = 'the slow brown fox hops over a lazy dog today';
    const spans = diffWords(before, after);
    const rebuiltBefore = spans
      .filter((s) => s.kind !== 'add')
      .map((s) => s.text)
      .join(' ');
    const rebuiltAfter = spans
      .filter((s) => s.kind !== 'remove')
      .map((s) => s.text)
      .join(' ');
    expect(rebuiltBefore).toBe(before);
    expect(rebuiltAfter).toBe(after);
  });

  it('collapses adjacent words of the same kind into one span', () => {
    const spans = diffWords('one two three', 'four five six');
    expect(spans).toEqual([
      { kind: 'remove', text: 'one two three' },
      { kind: 'add', text: 'four five six' },
    ]);
  });
});
