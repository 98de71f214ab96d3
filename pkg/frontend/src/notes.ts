/** Note queries and the composer's command shape. */

import { CommandDoc, NoteDoc, SessionDoc } from "./model.js";

export function notesForContent(doc: SessionDoc, contentId: string): NoteDoc[] {
  return doc.notes.filter((n) => n.contentId === contentId);
}

export function notesByAuthor(doc: SessionDoc, authorId: string): NoteDoc[] {
  return doc.notes.filter((n) => n.authorId === authorId);
}

export function authorName(doc: SessionDoc, note: NoteDoc): string {
  return doc.participants[note.authorId]?.displayName ?? note.authorId;
}

export function addNoteCommand(contentId: string, text: string): CommandDoc {
  return { variant: "AddNote", args: { contentId, text } };
}

export function deleteNoteCommand(noteId: string): CommandDoc {
  return { variant: "DeleteNote", args: { noteId } };
}
