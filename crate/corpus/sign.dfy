method sign(x: int) returns (s: int)
  ensures x > 0 ==> s == 1
  ensures x == 0 ==> s == 0
  ensures x < 0 ==> s == -1
  ensures s * s <= 1
{
  if (x > 0) {
    return 1;
  } else if (x == 0) {
    return 0;
  } else {
    return -1;
  }
}
